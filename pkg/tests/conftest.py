import numpy as np
import pytest

from gspcond import GspSystem


def _symmetric(rng, k, shift):
    x = rng.standard_normal((k, k))
    x = np.triu(x) + np.triu(x, 1).T
    x[np.diag_indices(k)] += shift
    return x


def make_random_system(seed, m=4, n=3, bc_equal=False,
                       struct_a="symmetric", struct_d="symmetric"):
    """Seeded random system, diagonally shifted to stay comfortably solvable."""
    rng = np.random.default_rng(seed)
    if struct_a == "symmetric":
        a_mat = _symmetric(rng, m, m)
    else:
        a_mat = rng.standard_normal((m, m)) + m * np.eye(m)
    if struct_d == "symmetric":
        d_mat = _symmetric(rng, n, n)
    else:
        d_mat = rng.standard_normal((n, n)) + n * np.eye(n)
    b_mat = rng.standard_normal((n, m))
    c_mat = b_mat.copy() if bc_equal else rng.standard_normal((n, m))
    return GspSystem(
        A=a_mat, B=b_mat, C=c_mat, D=d_mat,
        f=rng.standard_normal(m) + 1.0, g=rng.standard_normal(n) + 1.0,
        struct_a=struct_a, struct_d=struct_d,
    )


def make_identity_system(m=3, n=2):
    """A = I, B = C = 0, D = I with strictly nonzero right-hand sides."""
    return GspSystem(
        A=np.eye(m), B=np.zeros((n, m)), C=np.zeros((n, m)), D=np.eye(n),
        f=np.arange(1.0, m + 1.0), g=np.arange(1.0, n + 1.0),
        struct_a="symmetric", struct_d="symmetric",
    )


def make_scalar_system():
    """The 2x2 system with A=2, B=C=1, D=3, f=3, g=4 (solution [1, 1])."""
    return GspSystem(
        A=[[2.0]], B=[[1.0]], C=[[1.0]], D=[[3.0]], f=[3.0], g=[4.0],
        struct_a="symmetric", struct_d="symmetric",
    )


@pytest.fixture
def scalar_system():
    return make_scalar_system()


@pytest.fixture
def identity_system():
    return make_identity_system()
