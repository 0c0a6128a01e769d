"""SDPA sparse text format: parse to and write from canonical problems.

The file lists F_0 .. F_m over a block structure; negative block sizes denote
diagonal (LP) blocks.  Reading maps the data to the canonical form with
C = -F_0, A_i = F_i and b = c, so that the file's variables x appear as the
canonical dual vector y = -x.  Writing inverts that map; free variables are
split into nonnegative pairs because the format has no free cone.
"""

from __future__ import annotations

import numpy as np

from .blockmat import BlockStructure, SymBlockMat
from .problem import ConeProblem


class SdpaFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _clean_tokens(line: str) -> list[str]:
    for ch in ",(){}":
        line = line.replace(ch, " ")
    return line.split()


def parse_sdpa(text: str) -> ConeProblem:
    """Parse SDPA sparse input (entries "mat# blk# i j value", upper triangle)."""
    numbered = [(no + 1, raw) for no, raw in enumerate(text.splitlines())]
    lines = [(no, ln.strip()) for no, ln in numbered if ln.strip() and not ln.lstrip().startswith(("*", '"'))]
    if len(lines) < 4:
        raise SdpaFormatError(len(numbered), "missing header lines")

    def ints(idx, expect=None):
        no, ln = lines[idx]
        toks = _clean_tokens(ln)
        try:
            vals = [int(float(t)) for t in toks]
        except ValueError as exc:
            raise SdpaFormatError(no, f"expected integers, got {ln!r}") from exc
        if expect is not None and len(vals) < expect:
            raise SdpaFormatError(no, f"expected {expect} integers")
        return vals

    m = ints(0, 1)[0]
    nblocks = ints(1, 1)[0]
    sizes = ints(2, nblocks)[:nblocks]
    no_b, ln_b = lines[3]
    try:
        b = np.array([float(t) for t in _clean_tokens(ln_b)])
    except ValueError as exc:
        raise SdpaFormatError(no_b, "malformed objective vector") from exc
    if b.size != m:
        raise SdpaFormatError(no_b, f"objective vector has {b.size} entries, expected {m}")

    sdp_sizes = [s for s in sizes if s > 0]
    nonneg = sum(-s for s in sizes if s < 0)
    if any(s == 0 for s in sizes):
        raise SdpaFormatError(lines[2][0], "zero block size")
    structure = BlockStructure(tuple(sdp_sizes), nonneg, 0)

    # block index -> (kind, position)
    layout = []
    sdp_pos = 0
    nn_pos = 0
    for s in sizes:
        if s > 0:
            layout.append(("sdp", sdp_pos, s))
            sdp_pos += 1
        else:
            layout.append(("nn", nn_pos, -s))
            nn_pos += -s

    mats = [SymBlockMat.zeros(structure) for _ in range(m + 1)]
    seen: dict[tuple, tuple] = {}
    for no, ln in lines[4:]:
        toks = _clean_tokens(ln)
        if len(toks) != 5:
            raise SdpaFormatError(no, f"expected 5 fields, got {len(toks)}")
        try:
            mat_no, blk_no, i, j = (int(float(t)) for t in toks[:4])
            value = float(toks[4])
        except ValueError as exc:
            raise SdpaFormatError(no, "malformed entry") from exc
        if not 0 <= mat_no <= m:
            raise SdpaFormatError(no, f"matrix index {mat_no} out of range 0..{m}")
        if not 1 <= blk_no <= len(sizes):
            raise SdpaFormatError(no, f"block index {blk_no} out of range")
        kind, pos, size = layout[blk_no - 1]
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaFormatError(no, f"entry ({i}, {j}) outside block of size {size}")
        if i > j:
            raise SdpaFormatError(no, "entries must be upper triangular (i <= j)")
        key = (mat_no, blk_no, i, j)
        if key in seen and seen[key] != value:
            raise SdpaFormatError(no, f"conflicting duplicate entry for {key}")
        seen[key] = value
        target = mats[mat_no]
        if kind == "sdp":
            target.blocks[pos][i - 1, j - 1] = value
            target.blocks[pos][j - 1, i - 1] = value
        else:
            if i != j:
                raise SdpaFormatError(no, "diagonal block entries need i == j")
            target.nonneg[pos + i - 1] = value

    c_obj = -1.0 * mats[0]
    return ConeProblem(c_obj, mats[1:], b, meta={"source": "sdpa"})


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sdpa(p: ConeProblem, comment: str | None = None) -> str:
    """Serialize to SDPA sparse text; the inverse of :func:`parse_sdpa` up to
    the free-variable split."""
    st = p.structure
    lines = []
    if comment:
        for ln in comment.splitlines():
            lines.append(f"* {ln}")
    lines.append(str(p.num_constraints))

    diag_dim = st.nonneg_dim + 2 * st.free_dim
    sizes = [str(s) for s in st.sdp_blocks]
    if diag_dim:
        sizes.append(str(-diag_dim))
    lines.append(str(len(sizes)))
    lines.append(" ".join(sizes) if sizes else "0")
    lines.append(" ".join(_fmt(v) for v in p.rhs))

    def emit(mat_no: int, a: SymBlockMat, sign: float):
        out = []
        for blk_idx, blk in enumerate(a.blocks):
            n = blk.shape[0]
            for i in range(n):
                for j in range(i, n):
                    v = sign * blk[i, j]
                    if v != 0.0:
                        out.append(f"{mat_no} {blk_idx + 1} {i + 1} {j + 1} {_fmt(v)}")
        diag = np.concatenate([a.nonneg, a.free, -a.free]) if st.free_dim else a.nonneg
        blk_no = len(a.blocks) + 1
        for k, v in enumerate(diag):
            v = sign * v
            if v != 0.0:
                out.append(f"{mat_no} {blk_no} {k + 1} {k + 1} {_fmt(v)}")
        return out

    lines.extend(emit(0, p.c_obj, -1.0))
    for idx, a in enumerate(p.constraints):
        lines.extend(emit(idx + 1, a, 1.0))
    return "\n".join(lines) + "\n"
