"""Regenerate src/sobol_directions.cpp from scipy's Joe-Kuo direction numbers."""
import os
import sys

import numpy as np
import scipy

MAX_DIM = 1000

path = os.path.join(os.path.dirname(scipy.__file__), "stats", "_sobol_direction_numbers.npz")
table = np.load(path)
poly = table["poly"][:MAX_DIM]
vinit = table["vinit"][:MAX_DIM]

out = sys.argv[1] if len(sys.argv) > 1 else "src/sobol_directions.cpp"
with open(out, "w") as f:
    f.write("// Generated by scripts/gen_sobol_table.py (Joe-Kuo new-joe-kuo-6.21201). Do not edit.\n\n")
    f.write('#include "sashpcfe/sobol_directions.hpp"\n\nnamespace sashpcfe::detail {\n\n')
    f.write("const std::array<SobolDirection, kSobolMaxDim> kSobolDirections = {{\n")
    for p, v in zip(poly, vinit):
        deg = int(p).bit_length() - 1
        ms = ", ".join(str(int(x)) for x in v[: max(deg, 1)])
        f.write(f"    {{{int(p)}u, {{{ms}}}}},\n")
    f.write("}};\n\n}  // namespace sashpcfe::detail\n")
