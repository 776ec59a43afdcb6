import json

import pytest

from reticular.classify import CatalogLabel, Reject, classify_family
from reticular.tangent import Family, MultiGerm, check_inf_stable, check_inf_versal
from reticular.unfold import (
    TEXT_HEADER, VerificationError, build_codim1, build_versal, catalog, catalog_variants, codim1_sign_vectors,
    export_json, export_text, find_variant, import_text, minimality_probe, verify_catalog, verify_variant,
)


def test_catalog_sizes():
    assert [len(catalog(1)), len(catalog_variants(1))] == [5, 8]
    assert [len(catalog(2)), len(catalog_variants(2))] == [15, 38]
    with pytest.raises(ValueError):
        catalog(3)


# a few catalog lines written out by hand with their sign slots filled
@pytest.mark.parametrize("n,label,signs,family", [
    (1, "1(A1,A1)", "+", "y^2 + t + q^2 - z; y^2 - z"),
    (1, "1(A1,A1,A1)", "", "y^2 + t - z; y^2 + q - z; y^2 - q - z"),
    (2, "0(A1,A2)", "+", "y^2 + t + q1 - z; y^3 + q1*y - q2 - z"),
    (2, "1(A2,A2)", "-", "y^3 + t*y - q1*y + q2 - z; y^3 + q1*y - z"),
    (2, "1(A1,C3-)", "-", "y^2 + t + q1 - z; -x*y + y^3 + q1*y^2 + q2*y - z"),
    (2, "1(A1,A1,A1,A1)", "-+", "y^2 + t - q1 + q2 - z; y^2 + q1 - z; y^2 + q2 - z; y^2 - z"),
])
def test_catalog_lines(n, label, signs, family):
    v = find_variant(n, label, signs)
    assert v.family == Family.parse(family, n)


def test_find_variant_unknown():
    with pytest.raises(KeyError):
        find_variant(1, "1(A1,A3)")


def test_n1_catalog_verifies():
    rep = verify_catalog(1)
    assert rep.ok, [r.notes for r in rep.rows if not r.ok]
    assert rep.lines == 5


def test_n2_catalog_only_triple_fold_plus_rows_fail():
    rep = verify_catalog(2)
    bad = sorted((r.label.ascii, r.signs) for r in rep.rows if not r.ok)
    # with a "+" in the first slot the first sheet moves like the second
    # and no parameter separates them: the tangent space misses e2*z
    assert bad == [("1(A1,A1,A1)", "++"), ("1(A1,A1,A1)", "+-")]
    for r in rep.rows:
        if not r.ok:
            assert not r.stable and r.witness == "e2*z"
    assert sum(r.ok for r in rep.rows) == 36


def test_verify_row_fields():
    row = verify_variant(find_variant(1, "1(A1,A2)", "-"))
    d = row.as_dict()
    assert d["ok"] and d["label_unicode"] == "¹(⁰A₁⁰A₂)"
    assert set(d) >= {"nondegenerate", "stable", "label_ok", "mu_ok", "minimal", "witness"}


# ------------------------------------------------------------ minimality

def test_minimality_probe_on_catalog():
    for v in catalog_variants(1):
        assert not any(p.still_versal for p in minimality_probe(v.family, v.label.prefix))


def test_minimality_probe_detects_redundant_parameter():
    # q1 and q2 both move one sheet against the other; either one suffices
    F = Family.parse("y^2 + q1 - z; y^2 + q2 - z", n=2)
    assert [p.still_versal for p in minimality_probe(F, 0)] == [True, True]
    # a set-to-zero parameter stays a coordinate, and the t-row has only real coefficients
    G = Family.parse("y^2 + t + q1 - z; y^3 + q1*y + q2 - z", n=2)
    assert [p.still_versal for p in minimality_probe(G, 1)] == [False, False]


# ------------------------------------------------------------ construction

def test_build_versal():
    F = build_versal(MultiGerm.parse("y^2; y^3"), 2)
    assert str(F) == "y^2 + q1 - z; y^3 + q2*y - z"
    assert check_inf_versal(F, with_t=False).ok
    G = build_versal(MultiGerm.parse("x^2 + y^3"), 3)
    assert G.q == ("q1", "q2", "q3") and check_inf_stable(G).ok
    with pytest.raises(ValueError):
        build_versal(MultiGerm.parse("y^2; y^3"), 1)


def test_build_codim1():
    F = build_codim1(MultiGerm.parse("y^2; y^3"), 1)
    assert F == find_variant(1, "1(A1,A2)", "+").family
    G = build_codim1(MultiGerm.parse("y^3; x^2"), 2)
    assert classify_family(G) == CatalogLabel.parse("1(A2,B2)")
    with pytest.raises(ValueError):
        build_codim1(MultiGerm.parse("y^4"), 2)


def test_build_codim1_rejects_unstable_signs():
    f0 = MultiGerm.parse("y^2; y^2; y^2")
    assert codim1_sign_vectors(f0, 2) == [("++", False), ("+-", False), ("-+", True), ("--", True)]
    with pytest.raises(VerificationError) as exc:
        build_codim1(f0, 2, "++")
    assert "++" in str(exc.value)
    assert check_inf_stable(build_codim1(f0, 2, "-+")).ok


def test_build_rejects_out_of_budget():
    with pytest.raises(Reject):
        build_codim1(MultiGerm.parse("y^3; y^3"), 1)


# ------------------------------------------------------------ export

def test_text_export_round_trip():
    for n in (1, 2):
        entries = catalog(n)
        text = export_text(entries)
        lines = text.splitlines()
        assert lines[0] == TEXT_HEADER
        back = import_text(text, n)
        want = [(v.label, v.signs, v.family) for v in catalog_variants(n)]
        assert back == want


def test_text_export_fields():
    row = export_text(catalog(1)).splitlines()[1].split("\t")
    assert row == ["0(A1,A1)", "2", "1", ".", "1,1", "y^2 + q - z; y^2 - z"]


def test_json_export():
    data = json.loads(export_json(catalog(2)))
    assert len(data) == 38
    first = data[0]
    assert set(first) == {"label", "label_unicode", "n", "m", "signs", "mu", "template", "family"}
    assert first["family"] == ["y^2 + t + q1^2 + q2^2 - z", "y^2 - z"]
