from .curves import (BezierCubic, CircularArc, CurveSegment, Line, PolyParametric,
                     Reparametrized, curve_eval, curve_from_dict, curve_tangent)
from .io import MESH_FORMAT, mesh_from_dict, mesh_to_dict, read_mesh, write_mesh
from .mesh import (CURVED, DIRICHLET, INTERIOR, ROBIN, STRAIGHT, Element, ElementGeometry,
                   Mesh, MeshEdge, chebyshev_kernel_ball, element_diagnostics,
                   interior_quadrature, mesh_diagnostics, monomial_moments, tg_points)
from .quadrature import (BoundaryQuadRule, edge_quadrature, gauss_legendre01,
                         gauss_lobatto_interior01)
