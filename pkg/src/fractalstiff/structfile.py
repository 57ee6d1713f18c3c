"""Line-oriented structure files.

Sections, in any order::

    [nodes]      id x y
    [elements]   id n1 n2 n3 [top]
    [material]   a1_axial VALUE / a1_bend VALUE
    [supports]   node ux uy rz      (0 = free, 1 = fixed)
    [loads]      node fx fy mz

``#`` starts a comment.  Node ids are arbitrary tokens.
"""

from __future__ import annotations

from pathlib import Path

from .assembler import Element, Material, StructureModel

SECTIONS = ("nodes", "elements", "material", "supports", "loads")


class StructureFileError(ValueError):
    pass


def _float(tok: str, where: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise StructureFileError(f"{where}: expected a number, got {tok!r}") from None


def parse_structure(text: str) -> tuple[StructureModel, list[str], list[str]]:
    """Parse a structure document; returns the model plus node and element ids in file order."""
    rows: dict[str, list[tuple[int, list[str]]]] = {s: [] for s in SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in rows:
                raise StructureFileError(f"line {lineno}: unknown section [{section}]")
            continue
        if section is None:
            raise StructureFileError(f"line {lineno}: data before any section header")
        rows[section].append((lineno, line.split()))

    node_ids: list[str] = []
    coords = []
    for lineno, toks in rows["nodes"]:
        if len(toks) != 3:
            raise StructureFileError(f"line {lineno}: node needs 'id x y'")
        if toks[0] in node_ids:
            raise StructureFileError(f"line {lineno}: duplicate node id {toks[0]}")
        node_ids.append(toks[0])
        coords.append((_float(toks[1], f"line {lineno}"), _float(toks[2], f"line {lineno}")))
    index = {nid: k for k, nid in enumerate(node_ids)}

    def node(tok: str, lineno: int) -> int:
        if tok not in index:
            raise StructureFileError(f"line {lineno}: unknown node {tok!r}")
        return index[tok]

    elem_ids: list[str] = []
    elements = []
    for lineno, toks in rows["elements"]:
        if len(toks) not in (4, 5):
            raise StructureFileError(f"line {lineno}: element needs 'id n1 n2 n3 [top]'")
        nodes = tuple(node(t, lineno) for t in toks[1:4])
        top = node(toks[4], lineno) if len(toks) == 5 else None
        elem_ids.append(toks[0])
        elements.append(Element(nodes, top))

    mat = {}
    for lineno, toks in rows["material"]:
        if len(toks) != 2 or toks[0] not in ("a1_axial", "a1_bend"):
            raise StructureFileError(f"line {lineno}: material needs 'a1_axial VALUE' or 'a1_bend VALUE'")
        mat[toks[0]] = _float(toks[1], f"line {lineno}")
    try:
        material = Material(mat.get("a1_axial", 0.0), mat.get("a1_bend", 0.0))
    except ValueError as exc:
        raise StructureFileError(f"[material]: {exc}") from None

    supports = []
    for lineno, toks in rows["supports"]:
        if len(toks) != 4 or any(t not in ("0", "1") for t in toks[1:]):
            raise StructureFileError(f"line {lineno}: support needs 'node ux uy rz' with 0/1 flags")
        supports.append((node(toks[0], lineno), tuple(t == "1" for t in toks[1:])))

    loads = []
    for lineno, toks in rows["loads"]:
        if len(toks) != 4:
            raise StructureFileError(f"line {lineno}: load needs 'node fx fy mz'")
        loads.append((node(toks[0], lineno), *(_float(t, f"line {lineno}") for t in toks[1:])))

    model = StructureModel(coords, elements, material, supports, loads)
    return model, node_ids, elem_ids


def read_structure(path) -> tuple[StructureModel, list[str], list[str]]:
    return parse_structure(Path(path).read_text())


def format_structure(model: StructureModel, node_ids=None) -> str:
    ids = node_ids or [str(k + 1) for k in range(len(model.nodes))]
    out = ["[nodes]"]
    out += [f"{ids[k]} {x!r} {y!r}" for k, (x, y) in enumerate(model.nodes.tolist())]
    out.append("[elements]")
    for k, e in enumerate(model.elements):
        extra = f" {ids[e.top]}" if e.top is not None else ""
        out.append(f"{k + 1} " + " ".join(ids[n] for n in e.nodes) + extra)
    out += ["[material]", f"a1_axial {model.material.a1_axial!r}", f"a1_bend {model.material.a1_bend!r}"]
    out.append("[supports]")
    out += [f"{ids[n]} " + " ".join("1" if m else "0" for m in mask) for n, mask in model.supports]
    out.append("[loads]")
    out += [f"{ids[n]} {fx!r} {fy!r} {mz!r}" for n, fx, fy, mz in model.loads]
    return "\n".join(out) + "\n"
