"""
Datatype statistics and SDT selection
=====================================

Count declarations per type in MiniC sources, then rank the significant
datatypes over the bundled benchmark table.
"""

from typeline.analyzer import aggregate, collect_stats, figure3_fixture, select_sdt

# a single unit: declarations, loops, conditions and array accesses
src = """
int n; float w[8]; double acc; char tag;
int main() { for (int i = 0; i < 8; i++) { acc += w[i] * n; } return 0; }
"""
stats = collect_stats(src, unit="demo")
print(stats.type_counts)
print(stats.feature_counts)

# loop-weighted counts favour types used inside hot loops
print(stats.weighted)

# the bundled six-benchmark table, averaged per column
avg = aggregate(figure3_fixture())
print({k: round(float(v), 2) for k, v in avg.type_counts.items()})

# top four datatypes become the clustered lanes
print(select_sdt(avg, 4))
