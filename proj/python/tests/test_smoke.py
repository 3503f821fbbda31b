import os
import subprocess

import numpy as np
import pytest
import scipy.sparse

import phikrylov


def _phi_eig(A, v, t, ell):
    # symmetric A only; phi_{j+1}(z) = (phi_j(z) - 1/j!) / z
    w, S = np.linalg.eigh(A)
    z = -t * w
    out = np.exp(z)
    fact = 1.0
    for j in range(ell):
        out = np.where(np.abs(z) > 1e-8, (out - 1.0 / fact) / np.where(z == 0, 1, z), 1.0 / (fact * (j + 1)))
        fact *= j + 1
    return S @ (out * (S.T @ v))


@pytest.mark.parametrize("method", ["arnoldi", "harmonic", "si", "tra", "trha"])
def test_laplacian_methods(method):
    csr = phikrylov.laplacian2d(8, 0.05)
    A = phikrylov.to_scipy(csr).toarray()
    v = phikrylov.rhs_poly(8)
    out = phikrylov.phi(csr, v, t=1.0, ells=[0, 1, 2], method=method, k=20, q=4)
    assert out["ells"] == [0, 1, 2]
    for ell, y in zip(out["ells"], out["solutions"]):
        ref = _phi_eig(A, v, 1.0, ell)
        assert np.linalg.norm(y - ref) <= 1e-6 * np.linalg.norm(ref)


def test_dense_and_scipy_inputs_agree():
    rng = np.random.default_rng(0)
    A = np.diag(np.linspace(1, 5, 12)) + 0.1 * rng.standard_normal((12, 12))
    v = rng.standard_normal(12)
    a = phikrylov.phi(A, v, ells=[1], method="arnoldi", k=12)
    b = phikrylov.phi(scipy.sparse.csr_matrix(A), v, ells=[1], method="arnoldi", k=12)
    assert np.array_equal(a["solutions"][0], b["solutions"][0])
    assert a["matvecs"] == 12


def test_matvec_accounting():
    csr = phikrylov.laplacian2d(20, 0.01)
    out = phikrylov.phi(csr, phikrylov.rhs_poly(20), ells=[0, 1, 2], method="trha", k=10, q=3)
    assert out["converged"]
    assert out["matvecs"] == 10 + sum(10 - q for q in out["retained"])


def test_phi_dense_scalar():
    u = phikrylov.phi_dense(np.array([[-1.0]]), np.array([1.0]), 2)
    assert u[1][0] == pytest.approx(1 - np.exp(-1), rel=1e-14)
    assert u[2][0] == pytest.approx(np.exp(-1), rel=1e-14)


def test_errors_carry_codes():
    with pytest.raises(phikrylov.PhiKrylovError) as info:
        phikrylov.run({"ells": "1,,3"})
    assert info.value.code == "InvalidArgument"
    with pytest.raises(phikrylov.PhiKrylovError):
        phikrylov.phi(np.eye(3), np.ones(3), method="lanczos")


def test_run_and_compare_records():
    cfg = {"problem": "laplacian2d", "N": 8, "scale": 0.05, "ells": [0, 1], "k": 10, "q": 3, "oracle": "dense"}
    rec = phikrylov.run(cfg)
    assert rec["schema"] == "phikrylov.run/1"
    assert all(row["error"] <= 1e-6 for row in rec["runs"][0]["results"])
    recs, table = phikrylov.compare([dict(cfg, method="tra"), dict(cfg, method="trha")])
    assert recs["runs"][0]["problem_hash"] == recs["runs"][1]["problem_hash"]
    assert "trha" in table


def test_generators_shapes():
    (n, indptr, indices, data), u0 = phikrylov.advdiff2d(5)
    assert n == 25 and len(u0) == 25 and len(indptr) == 26
    n, _, _, data = phikrylov.lesp(10)
    assert n == 10 and len(data) == 28


@pytest.mark.skipif("PHIKRYLOV_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_runs():
    res = subprocess.run([os.environ["PHIKRYLOV_CLI"], "run", "--N", "6", "--method", "arnoldi", "--k", "36"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("# phikrylov.csv/1")
