"""Heisenberg uniqueness pair numerics for the hyperbola x1 x2 = eps."""

from kghup.hup_lab.annihilators import (
    AnnihilatorCertificate,
    CertificateKind,
    LatticeCross,
    LatticeResidual,
    ac_annihilator,
    ac_closed_form,
    lattice_residual,
    singular_annihilator,
)
from kghup.hup_lab.quadrature import (
    DEFAULT_TOL,
    HyperbolaMeasure,
    QuadValue,
    dilate,
    fourier_transform,
    fourier_transform_detail,
    poisson_extend,
    poisson_kernel,
    zero_measure,
)
from kghup.hup_lab.density import (
    DensityGapResult,
    ExpTarget,
    annihilator_target,
    basis_labels,
    classify_projection,
    density_gap,
    duality_bound,
    gram_matrix,
    poisson_difference_target,
    weight,
)
