"""Show the lexical metrics and density clustering on hand-made statements.

Statements that paraphrase the same fact sit within the default distance
threshold of each other; unrelated statements end up as noise.
"""
from slisum.cluster import Statement, dbscan, filter_clusters
from slisum.lexical import distance, hausdorff, rouge1_f1

PAIRS = [
    ("the dam reached record low levels", "the dam fell to record low levels"),
    ("the dam reached record low levels", "residents cut household water use"),
]
for a, b in PAIRS:
    print(f"R-1 F1 = {rouge1_f1(a, b):.3f}  distance = {distance(a, b):.3f}")
    print(f"  {a!r} vs {b!r}")

TEXTS = [
    "the dam reached record low levels",
    "the dam fell to record low levels",
    "the dam hit record low levels",
    "residents cut household water use by a fifth",
    "residents cut household water use by a large fifth",
    "a desalination study was approved",
]
statements = [
    Statement(text=t, window_ordinal=1, generation_seq=i + 1, position_in_summary=1)
    for i, t in enumerate(TEXTS)
]

result = dbscan(statements, eps=0.25, min_pts=2)
print(f"\neps=0.25 min_pts=2 -> {len(result.clusters)} clusters, "
      f"{len(result.noise)} noise statements")
for i, members in enumerate(result.clusters, 1):
    print(f"cluster {i}:")
    for member in members:
        print(f"  {member.text}")
for member in result.noise:
    print(f"noise: {member.text}")

retained = filter_clusters(result)
print(f"\nretained after the support threshold: {len(retained)} clusters")

groups = [[s.text for s in members] for members in result.clusters]
if len(groups) >= 2:
    print(f"hausdorff distance between the two clusters: "
          f"{hausdorff(groups[0], groups[1]):.3f}")
