import math

import numpy as np
import pytest

from prequant import (
    DimensionMismatch,
    EvenGridError,
    NonDecayingSection,
    Observable,
    PrequantumOperator,
    Section,
    apply_prequantum,
    covariant_derivative,
    dirac_residual,
    hamiltonian_vector_field,
    symmetry_defect,
)
from prequant.prequantum import dirac_sides, has_gaussian_factor, inner_product, normalization_residual
from prequant.scenario import default_sections
from prequant.symplectic import VectorField
from support import OPERATOR_CORPUS, points

HBARS = [1.0, 0.3, 1 / (2 * math.pi)]


def obs(text, n=1):
    return Observable.parse(text, n)


def values(s, pts):
    n = s.n
    return s.evaluate_array(pts[:, :n].T, pts[:, n:].T)


def assert_same_section(a, b, pts, tol=1e-12):
    va, vb = values(a, pts), values(b, pts)
    assert np.max(np.abs(va - vb)) <= tol * max(1.0, np.max(np.abs(vb)))


@pytest.fixture(scope="module")
def sections():
    return default_sections(1)


@pytest.fixture(scope="module")
def grid():
    return points(1, 100, np.random.default_rng(3))


# -- sections ------------------------------------------------------------------------


def test_section_complex_linearity(sections, grid):
    s = sections[1]
    a, b = 0.7, -1.9
    lhs = values(s.scale(complex(a, b)), grid)
    rhs = a * values(s, grid) + b * values(s.scale(1j), grid)
    assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_section_arithmetic(sections, grid):
    s, t = sections[1], sections[2]
    f = obs("q1*p1 - 2")
    assert_same_section(s + t - t, s, grid)
    assert np.allclose(values(s.multiply(f), grid), values(s, grid) * f.evaluate_array(grid[:, :1].T, grid[:, 1:].T), rtol=1e-14, atol=0)
    assert np.allclose(values(-s, grid), -values(s, grid), rtol=0, atol=0)


def test_section_dimension_check():
    with pytest.raises(DimensionMismatch):
        Section(obs("q1"), obs("q2", 2))


# -- covariant derivative ----------------------------------------------------------


def test_zero_field_gives_zero_section(sections, grid):
    X = hamiltonian_vector_field(obs("3"))
    d = covariant_derivative(X, sections[2])
    assert np.all(values(d, grid) == 0)


def test_covariant_derivative_along_position_shift(grid):
    hbar = 0.4
    X = hamiltonian_vector_field(obs("p1"))
    d = covariant_derivative(X, Section.parse("q1"), hbar)
    want = Section.parse("1", f"-p1*q1/{hbar!r}")
    assert_same_section(d, want, grid)


def test_covariant_derivative_along_momentum_shift(sections, grid):
    X = hamiltonian_vector_field(obs("q1"))
    s = sections[2]
    d = covariant_derivative(X, s, 0.7)
    minus_ds_dp = Section(-s.re.diff("p1"), -s.im.diff("p1"))
    assert_same_section(d, minus_ds_dp, grid)


def test_covariant_derivative_accepts_plain_fields(grid):
    X = VectorField([obs("1")], [obs("0")])
    d = covariant_derivative(X, Section.parse("q1"), 1.0)
    assert_same_section(d, Section.parse("1", "-p1*q1"), grid)


# -- the operator ---------------------------------------------------------------------


@pytest.mark.parametrize("hbar", HBARS)
def test_identity_condition(sections, grid, hbar):
    one = PrequantumOperator(obs("1"), hbar)
    for s in sections + [Section.parse("q1^3", "sin(p1)")]:
        out = one(s)
        assert np.array_equal(values(out, grid), values(s, grid))


@pytest.mark.parametrize("hbar", HBARS)
def test_momentum_operator(grid, hbar):
    out = PrequantumOperator(obs("p1"), hbar)(Section.parse("q1"))
    assert out.re.is_constant() and out.im.is_constant()
    assert values(out, grid[:1])[0] == pytest.approx(-1j * hbar, abs=1e-15)


def test_momentum_operator_is_derivative(sections, grid):
    hbar = 0.3
    s = sections[1]
    out = PrequantumOperator(obs("p1"), hbar)(s)
    want = Section(s.im.diff("q1") * hbar, -s.re.diff("q1") * hbar)
    assert_same_section(out, want, grid)


@pytest.mark.parametrize("hbar", HBARS)
def test_position_operator(grid, hbar):
    out = apply_prequantum(PrequantumOperator(obs("q1"), hbar), Section.parse("1"))
    assert_same_section(out, Section.parse("q1"), grid, tol=0)


def test_position_operator_general_form(sections, grid):
    hbar = 0.8
    s = sections[2]
    out = PrequantumOperator(obs("q1"), hbar)(s)
    ds = Section(s.re.diff("p1"), s.im.diff("p1")).scale(1j * hbar)
    assert_same_section(out, ds + s.multiply(obs("q1")), grid)


def test_operator_rejects_bad_hbar():
    with pytest.raises(ValueError):
        PrequantumOperator(obs("q1"), 0.0)


@pytest.mark.parametrize("hbar", HBARS)
def test_linearity_in_the_generator(sections, grid, hbar):
    rng = np.random.default_rng(11)
    corpus = [obs(t) for t in OPERATOR_CORPUS]
    for _ in range(10):
        i, j = rng.integers(len(corpus), size=2)
        f, g = corpus[i], corpus[j]
        a, b = rng.uniform(-2, 2, size=2)
        for s in sections:
            lhs = PrequantumOperator(a * f + b * g, hbar)(s)
            rhs = PrequantumOperator(f, hbar)(s).scale(a) + PrequantumOperator(g, hbar)(s).scale(b)
            assert_same_section(lhs, rhs, grid)


def test_linearity_in_the_section(sections, grid):
    op = PrequantumOperator(obs("q1^2*p1"), 0.5)
    c = complex(0.3, -1.2)
    lhs = op(sections[0].scale(c) + sections[2])
    rhs = op(sections[0]).scale(c) + op(sections[2])
    assert_same_section(lhs, rhs, grid)


# -- Dirac condition --------------------------------------------------------------------


def test_canonical_pair_gives_minus_identity(sections, grid):
    for hbar in HBARS:
        for s in sections:
            left, right = dirac_sides(obs("q1"), obs("p1"), s, hbar)
            assert_same_section(left, -s, grid, tol=1e-14)
            assert_same_section(right, -s, grid, tol=1e-14)


def test_equal_pair_gives_zero(sections, grid):
    f = obs("q1^2*p1")
    left, right = dirac_sides(f, f, sections[1])
    assert np.max(np.abs(values(left, grid))) == 0.0
    assert np.max(np.abs(values(right, grid))) == 0.0


@pytest.mark.parametrize("hbar", HBARS)
def test_dirac_condition_on_corpus(sections, grid, hbar):
    corpus = [obs(t) for t in OPERATOR_CORPUS]
    worst = 0.0
    for i, f in enumerate(corpus):
        for g in corpus[i + 1:]:
            for s in sections:
                worst = max(worst, dirac_residual(f, g, s, grid, hbar))
    assert worst < 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_dirac_condition_random_quadratics(sections, seed):
    from prequant.observable import random_polynomial

    rng = np.random.default_rng(seed)
    f, g = random_polynomial(1, 2, rng), random_polynomial(1, 2, rng)
    pts = points(1, 100, rng)
    for s in sections:
        assert dirac_residual(f, g, s, pts, 1.0) < 1e-9


def test_dirac_condition_in_two_dimensions():
    rng = np.random.default_rng(5)
    pts = points(2, 50, rng)
    fs = [obs(t, 2) for t in ("q1*p2", "p1^2 + q2", "q1*q2*p1")]
    for s in default_sections(2):
        for i, f in enumerate(fs):
            for g in fs[i + 1:]:
                assert dirac_residual(f, g, s, pts, 0.6) < 1e-9


def test_canonical_bracket_would_violate_dirac(sections, grid):
    # with the textbook bracket the relation holds with the opposite sign
    from prequant import canonical_poisson_bracket

    f, g, s = obs("q1"), obs("p1"), sections[0]
    wrong = PrequantumOperator(canonical_poisson_bracket(f, g))(s)
    _, right = dirac_sides(f, g, s)
    assert np.max(np.abs(values(wrong, grid) - values(right, grid))) > 0.1


def test_normalization_matches_two_pi_form(sections, grid):
    for f in (obs("q1"), obs("p1"), obs("q1*p1")):
        for s in sections:
            assert normalization_residual(f, s, grid) < 1e-12


# -- symmetry on decaying sections ----------------------------------------------------


def test_gaussian_detection(sections):
    assert all(has_gaussian_factor(s) for s in sections)
    assert not has_gaussian_factor(Section.parse("q1"))
    assert not has_gaussian_factor(Section.parse("exp(q1^2)"))
    assert not has_gaussian_factor(Section.parse("exp(-q1^2)"))  # no decay in p1
    assert has_gaussian_factor(Section.parse("0"))


def test_identity_is_symmetric(sections):
    assert symmetry_defect(obs("1"), sections[1], sections[2]) < 1e-12


def test_position_operator_symmetric_on_gaussian(sections):
    g = sections[0]
    assert symmetry_defect(obs("q1"), g, g) < 1e-8
    op = PrequantumOperator(obs("q1"))
    assert abs(inner_product(op(g), g, 6.0, 201).imag) < 1e-8


def test_momentum_operator_symmetric_on_distinct_sections(sections):
    s1, s2 = sections[1], sections[2]
    fine = symmetry_defect(obs("p1"), s1, s2, 6.0, 401)
    coarse = symmetry_defect(obs("p1"), s1, s2, 6.0, 201)
    assert coarse < 1e-8 and fine < 1e-8


@pytest.mark.parametrize("f", OPERATOR_CORPUS)
def test_corpus_operators_symmetric(sections, f):
    for a in sections:
        for b in sections:
            assert symmetry_defect(obs(f), a, b, hbar=0.7) < 1e-8


def test_gaussian_norm_by_quadrature(sections):
    # integral of exp(-(q^2+p^2)) over the plane is pi
    assert inner_product(sections[0], sections[0], 6.0, 201).real == pytest.approx(math.pi, abs=1e-10)


def test_symmetry_rejects_even_grid(sections):
    with pytest.raises(EvenGridError):
        symmetry_defect(obs("q1"), sections[0], sections[0], 6.0, 200)


def test_symmetry_rejects_non_decaying_sections(sections):
    with pytest.raises(NonDecayingSection):
        symmetry_defect(obs("q1"), Section.parse("q1"), sections[0])


def test_symmetry_requires_one_degree_of_freedom():
    s = default_sections(2)[0]
    with pytest.raises(DimensionMismatch):
        symmetry_defect(obs("q1", 2), s, s)
