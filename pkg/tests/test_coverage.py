"""Function-Type coverage matrix and the sufficiency verdict."""

import random

import pytest

from safereq import (
    CATCH_ALL_ALIAS,
    VERDICT_COMPLETE,
    VERDICT_MISSING,
    ClassifiedRequirement,
    build_matrix,
    catalog_from_alias_map,
    gap_ranking,
    shortfall,
    verdict,
)
from safereq.errors import AliasClosureViolationError

# Published sufficiency matrix: alias -> (n_func, n_prob, verdict).
SUFFICIENCY_MATRIX = {
    "DM": (18, 2, "Complete"),
    "EN": (9, 1, "Complete"),
    "NAV": (12, 0, "Missing"),
    "PEA": (14, 0, "Missing"),
    "PTC": (6, 1, "Complete"),
    "RD": (3, 0, "Missing"),
    "STR": (2, 1, "Missing"),
    "SUP": (15, 1, "Complete"),
    "TD": (6, 0, "Missing"),
    CATCH_ALL_ALIAS: (16, 0, "Missing"),
}


def matrix_catalog():
    return catalog_from_alias_map(
        {alias: f"System/{alias}" for alias in SUFFICIENCY_MATRIX if alias != CATCH_ALL_ALIAS}
        | {CATCH_ALL_ALIAS: "Other Function"}
    )


def rows_with_counts(counts):
    """Synthesize classified rows producing the given per-alias counts."""
    rows = []
    serial = 0
    for alias, (n_func, n_prob, *rest) in counts.items():
        n_other = rest[0] if rest and isinstance(rest[0], int) else 0
        for rtype, n in (("FUNC", n_func), ("PROB", n_prob), ("_OT_", n_other)):
            for _ in range(n):
                rows.append(
                    ClassifiedRequirement(
                        req_id=str(1000 + serial),
                        function=alias,
                        rtype=rtype,
                        confidence=90,
                    )
                )
                serial += 1
    return rows


# ---------------------------------------------------------------------------
# Verdict rule
# ---------------------------------------------------------------------------


def test_verdict_brute_force_over_full_grid():
    for n_func in range(6):
        for n_prob in range(4):
            expected = "Complete" if (n_func >= 3 and n_prob >= 1) else "Missing"
            assert verdict(n_func, n_prob) == expected


def test_verdict_constants():
    assert VERDICT_COMPLETE == "Complete"
    assert VERDICT_MISSING == "Missing"


# ---------------------------------------------------------------------------
# Matrix construction
# ---------------------------------------------------------------------------


def test_published_sufficiency_matrix_verdicts():
    counts = {a: (f, p) for a, (f, p, _) in SUFFICIENCY_MATRIX.items()}
    matrix = build_matrix(rows_with_counts(counts), matrix_catalog())
    got = {row.alias: (row.n_func, row.n_prob, row.verdict) for row in matrix.rows}
    assert got == SUFFICIENCY_MATRIX


def test_matrix_rows_follow_catalog_order_and_zero_fill():
    catalog = catalog_from_alias_map(
        {"A": "S/A", "B": "S/B", CATCH_ALL_ALIAS: "Other Function"}
    )
    matrix = build_matrix(rows_with_counts({"B": (1, 0)}), catalog)
    assert [r.alias for r in matrix.rows] == ["A", "B", CATCH_ALL_ALIAS]
    assert (matrix.rows[0].n_func, matrix.rows[0].n_prob) == (0, 0)
    assert matrix.rows[0].verdict == "Missing"


def test_other_type_rows_never_contribute_to_sufficiency():
    catalog = catalog_from_alias_map({"A": "S/A", CATCH_ALL_ALIAS: "Other Function"})
    # 3 FUNC + 5 _OT_ but zero PROB: still Missing.
    matrix = build_matrix(rows_with_counts({"A": (3, 0, 5)}), catalog)
    assert matrix.rows[0].n_other == 5
    assert matrix.rows[0].verdict == "Missing"
    # Adding the one PROB flips it.
    matrix = build_matrix(rows_with_counts({"A": (3, 1, 5)}), catalog)
    assert matrix.rows[0].verdict == "Complete"


def test_catch_all_row_is_triage_bucket_with_verdict():
    matrix = build_matrix(
        rows_with_counts({CATCH_ALL_ALIAS: (16, 0)}), matrix_catalog()
    )
    triage = [r for r in matrix.rows if r.alias == CATCH_ALL_ALIAS]
    assert len(triage) == 1
    assert triage[0].is_triage_bucket
    assert triage[0].verdict == "Missing"


def test_totals_sum_the_columns():
    counts = {a: (f, p) for a, (f, p, _) in SUFFICIENCY_MATRIX.items()}
    matrix = build_matrix(rows_with_counts(counts), matrix_catalog())
    assert matrix.totals == (101, 6, 0)


def test_unknown_alias_raises_closure_violation():
    catalog = catalog_from_alias_map({"A": "S/A", CATCH_ALL_ALIAS: "Other Function"})
    rogue = [ClassifiedRequirement(req_id="1", function="Z", rtype="FUNC", confidence=9)]
    with pytest.raises(AliasClosureViolationError):
        build_matrix(rogue, catalog)


def test_matrix_counts_match_bruteforce_on_random_sets():
    catalog = catalog_from_alias_map(
        {"A": "S/A", "B": "S/B", "C": "S/C", CATCH_ALL_ALIAS: "Other Function"}
    )
    rng = random.Random(4242)
    aliases = ["A", "B", "C", CATCH_ALL_ALIAS]
    types = ["FUNC", "PROB", "_OT_"]
    for _ in range(50):
        rows = [
            ClassifiedRequirement(
                req_id=str(i),
                function=rng.choice(aliases),
                rtype=rng.choice(types),
                confidence=90,
            )
            for i in range(rng.randint(0, 40))
        ]
        matrix = build_matrix(rows, catalog)
        for mrow in matrix.rows:
            mine = [r for r in rows if r.function == mrow.alias]
            assert mrow.n_func == sum(1 for r in mine if r.rtype == "FUNC")
            assert mrow.n_prob == sum(1 for r in mine if r.rtype == "PROB")
            assert mrow.n_other == sum(1 for r in mine if r.rtype == "_OT_")
            assert mrow.verdict == verdict(mrow.n_func, mrow.n_prob)


# ---------------------------------------------------------------------------
# Gap ranking
# ---------------------------------------------------------------------------


def test_shortfall_counts_missing_requirements():
    counts = {"A": (0, 0), "B": (2, 1), "C": (3, 0), "D": (5, 2)}
    catalog = catalog_from_alias_map(
        {a: f"S/{a}" for a in counts} | {CATCH_ALL_ALIAS: "Other Function"}
    )
    matrix = build_matrix(rows_with_counts(counts), catalog)
    by_alias = {r.alias: shortfall(r) for r in matrix.rows}
    assert by_alias["A"] == 4
    assert by_alias["B"] == 1
    assert by_alias["C"] == 1
    assert by_alias["D"] == 0


def test_gap_ranking_orders_by_shortfall_then_catalog_order():
    counts = {a: (f, p) for a, (f, p, _) in SUFFICIENCY_MATRIX.items()}
    matrix = build_matrix(rows_with_counts(counts), matrix_catalog())
    ranked = gap_ranking(matrix)
    assert [(r.alias, s) for r, s in ranked] == [
        ("NAV", 1),
        ("PEA", 1),
        ("RD", 1),
        ("STR", 1),
        ("TD", 1),
    ]
    assert all(not r.is_triage_bucket for r, _ in ranked)


def test_gap_ranking_excludes_complete_functions():
    counts = {"A": (3, 1), "B": (0, 0)}
    catalog = catalog_from_alias_map(
        {a: f"S/{a}" for a in counts} | {CATCH_ALL_ALIAS: "Other Function"}
    )
    ranked = gap_ranking(build_matrix(rows_with_counts(counts), catalog))
    assert [r.alias for r, _ in ranked] == ["B"]
