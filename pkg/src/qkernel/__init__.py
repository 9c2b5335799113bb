"""Kernels and quasi-kernels of small digraphs, with certified shrinking and exhaustive search."""

from .digraph import Digraph, GraphEncoding, VertexSet, build, decode, encode, parse_edge_list, serialize_edge_list
from .domination import epon_injection, epons, is_independent, is_inward_dominated, is_kernel, is_quasi_kernel
from .explorer import ScanConfig, SearchReport, merge_reports, scan
from .solvers import (
    ShrinkCertificate,
    chvatal_quasi_kernel,
    enumerate_kernels,
    find_kernel,
    min_quasi_kernel,
    shrink_kernel,
    verify_certificate,
)

__all__ = [
    "Digraph", "GraphEncoding", "VertexSet", "build", "decode", "encode", "parse_edge_list", "serialize_edge_list",
    "epon_injection", "epons", "is_independent", "is_inward_dominated", "is_kernel", "is_quasi_kernel",
    "ScanConfig", "SearchReport", "merge_reports", "scan",
    "ShrinkCertificate", "chvatal_quasi_kernel", "enumerate_kernels", "find_kernel", "min_quasi_kernel",
    "shrink_kernel", "verify_certificate",
]
