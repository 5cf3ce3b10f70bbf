"""Shipped example pipelines and synthetic pipeline generators for testing."""

from __future__ import annotations

import random

from .dsl import StencilProgram, parse_program

BLUR = """
# two-stage 3x3 box blur
pipeline blur {
  input IN;
  stage K1 = (IN[0,0] + IN[0,1] + IN[0,2]
            + IN[1,0] + IN[1,1] + IN[1,2]
            + IN[2,0] + IN[2,1] + IN[2,2]) / 9;
  output K1;
}
"""

# one buffer read by a 3-line and a 2-line window, chained consumers
FIG_CHAIN = """
pipeline chain3 {
  input K0;
  stage K1 = (K0[0,0] + K0[0,1] + K0[0,2]
            + K0[1,0] + K0[1,1] + K0[1,2]
            + K0[2,0] + K0[2,1] + K0[2,2]) / 9;
  stage K2 = (K0[0,0] + K0[0,1] + K0[1,0] + K0[1,1]) / 4 + K1[0,0];
  output K2;
}
"""

# two independent 3x3 consumers of one buffer, both feeding a merge stage
DIAMOND = """
pipeline diamond {
  input K0;
  stage K1 = (K0[0,0] + K0[1,1] + K0[2,2]) / 3;
  stage K2 = (K0[0,2] + K0[1,1] + K0[2,0]) / 3;
  stage K3 = K1[0,0] + K2[0,0];
  output K3;
}
"""

# two same-producer consumers started at their earliest legal cycles collide
CONTENTION_PAIR = """
pipeline pair {
  input K0;
  stage K1 = (K0[0,0] + K0[1,1] + K0[2,2]) / 3;
  stage K2 = (K0[0,0] + K0[0,1] + K0[1,0] + K0[1,1]) / 4;
  stage K3 = K1[0,0] + K2[0,0];
  output K3;
}
"""

CANNY_S = """
# single-consumer edge-detector chain
pipeline canny_s {
  input IN;
  stage B1 = (IN[0,0] + IN[0,1] + IN[0,2] + IN[1,0] + IN[1,1]
            + IN[1,2] + IN[2,0] + IN[2,1] + IN[2,2]) / 9;
  stage B2 = (B1[0,0] + B1[0,2] + B1[2,0] + B1[2,2] + B1[1,1] * 4) >> 3;
  stage GX = B2[0,0] - B2[0,2] + (B2[1,0] - B2[1,2]) * 2 + B2[2,0] - B2[2,2];
  stage GM = abs(GX[0,0]);
  stage NM = max(GM[1,1] - GM[0,0], GM[1,1] - GM[2,2]);
  stage TH = clamp(NM[0,0] - 40, 0, 255);
  stage HY = max(TH[0,0], max(TH[0,1], max(TH[1,0], TH[1,1])));
  stage FN = min(HY[0,0], 255);
  output FN;
}
"""

CANNY_M = """
# edge-detector with a shared blur feeding both gradient directions
pipeline canny_m {
  input IN;
  stage B1 = (IN[0,0] + IN[0,1] + IN[0,2] + IN[1,0] + IN[1,1]
            + IN[1,2] + IN[2,0] + IN[2,1] + IN[2,2]) / 9;
  stage B2 = (B1[0,0] + B1[0,2] + B1[2,0] + B1[2,2] + B1[1,1] * 4) >> 3;
  stage GX = B2[0,0] - B2[0,2] + (B2[1,0] - B2[1,2]) * 2 + B2[2,0] - B2[2,2];
  stage GY = B2[0,0] - B2[2,0] + (B2[0,1] - B2[2,1]) * 2 + B2[0,2] - B2[2,2];
  stage GM = (abs(GX[0,1]) + abs(GX[1,1]) * 2 + abs(GX[2,1])
            + abs(GY[0,0]) + abs(GY[1,0]) * 2 + abs(GY[2,2])) >> 2;
  stage NM = max(GM[1,1] - GM[0,0], GM[1,1] - GM[2,2]);
  stage TH = clamp(NM[1,1] - NM[0,0] / 8 - NM[2,2] / 8 - 40, 0, 255);
  stage HY = max(TH[0,0], max(TH[0,1], max(TH[1,0], TH[2,2])));
  stage FN = min(HY[0,0] + HY[1,1] + HY[2,2], 255);
  output FN;
}
"""

HARRIS_S = """
pipeline harris_s {
  input IN;
  stage DX = IN[1,0] - IN[1,2];
  stage XX = DX[0,0] * DX[0,0] >> 4;
  stage SX = XX[0,0] + XX[0,1] + XX[0,2] + XX[1,0] + XX[1,1]
           + XX[1,2] + XX[2,0] + XX[2,1] + XX[2,2];
  stage RS = SX[0,0] - (SX[1,1] >> 2);
  stage TH = clamp(RS[0,0], 0, 255);
  stage NM = max(TH[1,1], max(TH[0,0], TH[2,2]));
  output NM;
}
"""

HARRIS_M = """
# corner detector where both gradient products read the input buffer
pipeline harris_m {
  input IN;
  stage XX = (IN[0,0] - IN[2,2]) * (IN[2,0] - IN[0,2]) >> 4;
  stage YY = (IN[0,1] - IN[2,1]) * (IN[0,1] - IN[2,1]) >> 4;
  stage SX = XX[0,0] + XX[0,2] + XX[1,1] + XX[2,0] + XX[2,2];
  stage SY = YY[0,0] + YY[0,2] + YY[1,1] + YY[2,0] + YY[2,2];
  stage RS = SX[1,1] * SY[1,1] - ((SX[0,0] + SX[2,2] + SY[0,0] + SY[2,2]) >> 2);
  stage TH = clamp(RS[1,1] - RS[0,0] / 8 - RS[2,2] / 8, 0, 255);
  output TH;
}
"""

UNSHARP_M = """
# sharpen by amplified difference from a two-pass blur of the same input
pipeline unsharp_m {
  input IN;
  stage B1 = (IN[0,0] + IN[0,1] + IN[0,2] + IN[1,0] + IN[1,1]
            + IN[1,2] + IN[2,0] + IN[2,1] + IN[2,2]) / 9;
  stage B2 = (B1[0,0] + B1[0,2] + B1[1,1] * 2 + B1[2,0] + B1[2,2]) / 6;
  stage SB = IN[0,0] - (B2[0,0] + B2[1,1] * 2 + B2[2,2]) / 4;
  stage AM = (SB[0,0] + SB[1,1] + SB[2,2]) * 2 / 3;
  stage AD = IN[0,0] + (AM[0,0] + AM[1,1] + AM[2,2]) / 3;
  stage CL = clamp(AD[1,1] + (AD[0,0] - AD[2,2]) / 8, 0, 255);
  output CL;
}
"""

XCORR_M = """
# column correlation against a tall 18x1 running sum of the input
pipeline xcorr_m {
  input IN;
  stage CS = (IN[0,0] + IN[1,0] + IN[2,0] + IN[3,0] + IN[4,0] + IN[5,0]
            + IN[6,0] + IN[7,0] + IN[8,0] + IN[9,0] + IN[10,0] + IN[11,0]
            + IN[12,0] + IN[13,0] + IN[14,0] + IN[15,0] + IN[16,0] + IN[17,0]) >> 4;
  stage RS = clamp(IN[0,0] * 3 - CS[0,0], 0, 255);
  output RS;
}
"""

DENOISE_M = """
# denoiser with two shared buffers: the input and the first smoothing pass
pipeline denoise_m {
  input IN;
  stage K1 = (IN[0,0] + IN[0,1] + IN[0,2] + IN[1,0] + IN[1,1]
            + IN[1,2] + IN[2,0] + IN[2,1] + IN[2,2]) / 9;
  stage K2 = max(IN[0,0], max(IN[1,1], IN[2,2]));
  stage K3 = (K1[0,0] + K1[0,2] + K1[1,1] * 2 + K1[2,0] + K1[2,2]) / 6;
  stage K4 = clamp(K1[1,1] + K3[0,0] + K3[1,1] + K3[2,2] - K2[0,0] - K2[2,2], 0, 255);
  output K4;
}
"""

CORPUS: dict[str, str] = {
    "canny_s": CANNY_S,
    "canny_m": CANNY_M,
    "harris_s": HARRIS_S,
    "harris_m": HARRIS_M,
    "unsharp_m": UNSHARP_M,
    "xcorr_m": XCORR_M,
    "denoise_m": DENOISE_M,
}

FIXTURES: dict[str, str] = {
    "blur": BLUR,
    "chain3": FIG_CHAIN,
    "diamond": DIAMOND,
    "pair": CONTENTION_PAIR,
}


def corpus_program(name: str, width: int, height: int) -> StencilProgram:
    source = CORPUS.get(name) or FIXTURES[name]
    return parse_program(source, width, height)


def multi_consumer_names() -> list[str]:
    return ["canny_m", "harris_m", "unsharp_m", "xcorr_m", "denoise_m"]


def random_program(seed: int, max_stages: int = 5) -> StencilProgram:
    """Small random pipeline for oracle comparisons: bounded windows and
    depth so exhaustive integer search stays tractable."""
    rng = random.Random(seed)
    n = rng.randint(3, max_stages)
    names = ["IN"] + [f"K{i}" for i in range(1, n)]
    lines = ["pipeline rnd {", "  input IN;"]
    consumed: set[str] = set()
    for i in range(1, n):
        nreads = 1 if i == 1 else rng.choice([1, 1, 2])
        producers = rng.sample(names[:i], k=min(nreads, i))
        terms = []
        for p in producers:
            consumed.add(p)
            sh = rng.choice([1, 2, 3])
            sw = rng.choice([1, 2, 3])
            terms.append(f"{p}[{sh - 1},{sw - 1}]")
            terms.append(f"{p}[0,0]")
        expr = " + ".join(terms)
        lines.append(f"  stage {names[i]} = ({expr}) >> 1;")
    sinks = [s for s in names[1:] if s not in consumed]
    if not sinks:
        sinks = [names[-1]]
    for s in sinks:
        lines.append(f"  output {s};")
    lines.append("}")
    return parse_program("\n".join(lines))


def scalability_program(n_stages: int) -> StencilProgram:
    """Long chain where one in three stages feeds two ordered consumers."""
    lines = ["pipeline scale {", "  input K0;"]
    for i in range(1, n_stages):
        prev = f"K{i - 1}"
        if i >= 2 and (i - 1) % 3 == 0:
            two_back = f"K{i - 2}"
            lines.append(
                f"  stage K{i} = ({prev}[0,0] + {prev}[2,2] + {two_back}[0,0] + {two_back}[2,2]) >> 2;"
            )
        else:
            lines.append(f"  stage K{i} = ({prev}[0,0] + {prev}[2,2]) >> 1;")
    lines.append(f"  output K{n_stages - 1};")
    lines.append("}")
    return parse_program("\n".join(lines))
