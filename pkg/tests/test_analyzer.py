import csv
import io
import random
from fractions import Fraction

import pytest

from typeline.analyzer import (
    EmptyCorpus,
    TypeStats,
    aggregate,
    collect_stats,
    figure3_fixture,
    fixture_path,
    read_type_csv,
    select_sdt,
    write_stats_csv,
)

# hand transcription of the bundled type and feature tables
TYPES = """\
astar 61 0 0 0 1 0 0 0
btree 21 0 0 4 41 2 0 5
fss 144 38 7 16 6 47 4 12
fft 31 0 36 0 0 0 0 0
viterbi 7 0 0 17 0 0 0 1
raytracer 221 151 37 0 41 23 10 4"""
FEATURES = """\
astar 25 95 0 4 0 112
btree 23 63 3 21 34 35
fss 37 98 21 107 4 15
fft 9 7 10 117 28 6
viterbi 7 13 0 2 1 21
raytracer 40 102 40 155 32 68"""
TYPE_COLS = "int float double long char struct enum typedef".split()
FEATURE_COLS = "loops conditions static const unsigned array_ops".split()


def _table(text, cols):
    return {line.split()[0]: dict(zip(cols, map(int, line.split()[1:]))) for line in text.splitlines()}


def test_fixture_matches_transcription():
    types, feats = _table(TYPES, TYPE_COLS), _table(FEATURES, FEATURE_COLS)
    rows = figure3_fixture()
    assert [s.unit for s in rows] == list(types)
    for s in rows:
        assert s.type_counts == types[s.unit]
        assert s.feature_counts == feats[s.unit]


def test_fixture_averages():
    # recomputed straight from the CSV text, spreadsheet style
    with open(fixture_path("figure3a.csv"), newline="") as fh:
        rows = list(csv.DictReader(fh))
    avg = aggregate(read_type_csv(fixture_path("figure3a.csv")))
    for col in TYPE_COLS:
        assert avg.type_counts[col] == Fraction(sum(int(r[col]) for r in rows), len(rows))
    assert avg.type_counts["int"] == Fraction(485, 6)
    expected = {"int": 80.83, "float": 31.5, "char": 14.83, "double": 13.33, "long": 6.17, "struct": 12.0, "typedef": 3.67, "enum": 2.33}
    for k, v in expected.items():
        assert round(float(avg.type_counts[k]), 2) == v


def test_select_sdt_fixture():
    avg = aggregate(figure3_fixture())
    assert select_sdt(avg, 4) == ["int", "float", "char", "double"]
    assert set(select_sdt(avg, 4)) == {"int", "float", "double", "char"}
    assert select_sdt(avg, 1) == ["int"]
    assert "long" in select_sdt(avg, 5, include_long=True)


def test_select_sdt_ties():
    assert select_sdt(TypeStats(), 2) == ["int", "float"]
    assert select_sdt(TypeStats(), 4) == ["int", "float", "double", "char"]


def test_select_scale_invariance():
    rng = random.Random(7)
    for _ in range(50):
        s = TypeStats()
        for k in TYPE_COLS:
            s.type_counts[k] = rng.randint(0, 50)
        c = rng.randint(1, 9)
        t = TypeStats(type_counts={k: v * c for k, v in s.type_counts.items()})
        assert select_sdt(s, 4) == select_sdt(t, 4)


def test_adding_occurrences_never_lowers_rank():
    rng = random.Random(11)
    for _ in range(50):
        s = TypeStats()
        for k in TYPE_COLS:
            s.type_counts[k] = rng.randint(0, 20)
        full = select_sdt(s, 4)
        for t in full:
            more = TypeStats(type_counts=dict(s.type_counts))
            more.type_counts[t] += rng.randint(1, 5)
            assert select_sdt(more, 4).index(t) <= full.index(t)


def test_aggregate_identity_and_mean():
    s = collect_stats("int x; float y;")
    a = aggregate([s])
    assert a.type_counts == s.type_counts and a.feature_counts == s.feature_counts
    two = aggregate([TypeStats(type_counts={**dict.fromkeys(TYPE_COLS, 0), "int": 2}),
                     TypeStats(type_counts={**dict.fromkeys(TYPE_COLS, 0), "int": 4})])
    assert two.type_counts["int"] == 3
    with pytest.raises(EmptyCorpus):
        aggregate([])


def test_collect_example():
    # statistics need only a parse, so the undeclared array is fine here
    s = collect_stats("int x; for(int i=0;i<3;i++) a[i]=x;")
    assert s.type_counts["int"] == 2
    assert s.feature_counts["loops"] == 1 and s.feature_counts["conditions"] == 1
    assert s.feature_counts["array_ops"] == 1
    assert collect_stats("int a[3]; int x; for(int i=0;i<3;i++) a[i]=x;").type_counts["int"] == 3


def test_collect_array_ops():
    s = collect_stats("int a[3]; int x; for(int i=0;i<3;i++) a[i]=x;")
    assert s.feature_counts["array_ops"] == 1


def test_collect_empty_and_qualifiers():
    s = collect_stats("")
    assert not any(s.type_counts.values()) and not any(s.feature_counts.values())
    s = collect_stats("static const unsigned int k=1;")
    assert s.type_counts["int"] == 1
    assert (s.feature_counts["static"], s.feature_counts["const"], s.feature_counts["unsigned"]) == (1, 1, 1)


def test_collect_composites():
    src = """
    struct P { int x; float y; };
    enum E { A, B };
    typedef double real;
    struct P p; enum E e; real r;
    """
    s = collect_stats(src)
    assert s.type_counts["struct"] == 2  # definition plus one variable
    assert s.type_counts["enum"] == 2
    assert s.type_counts["typedef"] == 1
    assert s.type_counts["double"] == 1  # the typedef name resolves
    assert s.type_counts["int"] == 1 and s.type_counts["float"] == 1


def test_loop_weighting():
    src = "int g; int main() { for (int i = 0; i < 3; i++) { for (int j = 0; j < 3; j++) { g += j; } } return 0; }"
    s = collect_stats(src, loop_weight=10)
    # g is used at depth 2, i declared at depth 1, j at depth 2
    assert s.weighted["int"] == 100 + 10 + 100
    assert all(s.weighted[k] >= s.type_counts[k] for k in TYPE_COLS)
    with pytest.raises(ValueError):
        collect_stats(src, loop_weight=0)


def test_stats_csv_schema():
    buf = io.StringIO()
    write_stats_csv([collect_stats("int x;", unit="u")], buf)
    header, row = buf.getvalue().splitlines()
    assert header.split(",") == ["unit"] + TYPE_COLS + FEATURE_COLS + ["score"]
    assert row.startswith("u,1,")
