"""Reading and writing the ``curvem-mesh/1`` JSON mesh format."""

import json

from ..errors import MeshError
from .curves import Line, curve_from_dict
from .mesh import Element, Mesh, MeshEdge

MESH_FORMAT = "curvem-mesh/1"


def mesh_to_dict(mesh):
    curves, edges = [], []
    for e in mesh.edges:
        entry = {"v0": int(e.v0), "v1": int(e.v1), "declared": e.declared, "boundary": e.boundary}
        implicit = isinstance(e.curve, Line) and e.declared == "straight"
        if not implicit:
            entry["curve"] = len(curves)
            curves.append(e.curve.to_dict())
        edges.append(entry)
    return {
        "format": MESH_FORMAT,
        "vertices": mesh.vertices.tolist(),
        "curves": curves,
        "edges": edges,
        "elements": [{"edges": [[int(k), int(s)] for k, s in el.edges], "region": int(el.region)}
                     for el in mesh.elements],
        "kappa": {str(r): float(v) for r, v in mesh.kappa.items()},
    }


def mesh_from_dict(d):
    if d.get("format") != MESH_FORMAT:
        raise MeshError(f"expected format {MESH_FORMAT!r}, got {d.get('format')!r}")
    curves = [curve_from_dict(c) for c in d.get("curves", [])]
    edges = []
    for i, e in enumerate(d["edges"]):
        c = e.get("curve")
        if c is not None and not 0 <= c < len(curves):
            raise MeshError(f"edge {i}: curve index {c} out of range")
        edges.append(MeshEdge(int(e["v0"]), int(e["v1"]), None if c is None else curves[c],
                              e.get("declared", "straight"), e.get("boundary", "interior")))
    elements = [Element([(int(k), int(s)) for k, s in el["edges"]], int(el.get("region", 0)))
                for el in d["elements"]]
    kappa = {int(r): float(v) for r, v in d.get("kappa", {"0": 1.0}).items()}
    return Mesh(d["vertices"], edges, elements, kappa)


def write_mesh(mesh, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mesh_to_dict(mesh), fh, indent=1)
        fh.write("\n")


def read_mesh(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeshError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return mesh_from_dict(data)
