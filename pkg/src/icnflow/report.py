"""Analysis reports: per-utterance metric history as CSV and rendered figures.

The batch analyzer collects one MetricsReport per utterance; this module
writes the history as a delimited file and renders two figures alongside
it: the eight metric families over utterance index, and a layered drawing
of the final cluster graph (detailing grows downward, exploration fans out
horizontally).  matplotlib is imported lazily so the engine itself stays
figure-free.
"""

from __future__ import annotations

import csv
from pathlib import Path

HISTORY_COLUMNS = (
    ("utterance", lambda r: r["at_utterance"]),
    ("fulfilled_count", lambda r: r["fulfilled_requirements"]["count"]),
    ("fulfilled_ratio", lambda r: r["fulfilled_requirements"]["ratio"]),
    ("alternative_count", lambda r: r["exploration"]["alternative_count"]),
    ("switch_count", lambda r: r["exploration"]["switch_count"]),
    ("substantiated_ratio", lambda r: r["substantiated_decisions"]["ratio"]),
    ("orphan_count", lambda r: r["substantiated_decisions"]["orphan_count"]),
    ("backtracking_count", lambda r: r["backtracking"]["count"]),
    ("backtracking_resolved", lambda r: r["backtracking"]["resolved_count"]),
    ("contradiction_count", lambda r: r["contradictions"]["count"]),
    ("repetition_count", lambda r: r["repetitions"]["count"]),
    ("repetition_productive", lambda r: r["repetitions"]["productive_count"]),
    ("unconsidered_count", lambda r: r["unconsidered_needs"]["count"]),
    ("unexplored_count", lambda r: r["unexplored_items"]["count"]),
)

_PANELS = (
    ("Fulfilled requirements", [("fulfilled_count", "count")]),
    ("Exploration", [("alternative_count", "alternatives"), ("switch_count", "switches")]),
    ("Substantiated decisions", [("substantiated_ratio", "ratio")]),
    ("Backtracking", [("backtracking_count", "count"), ("backtracking_resolved", "resolved")]),
    ("Contradictions", [("contradiction_count", "count")]),
    ("Repetitions", [("repetition_count", "count"), ("repetition_productive", "productive")]),
    ("Unconsidered needs", [("unconsidered_count", "count")]),
    ("Unexplored items", [("unexplored_count", "count")]),
)


def write_history_csv(reports: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([name for name, _ in HISTORY_COLUMNS])
        for report in reports:
            writer.writerow([extract(report) for _, extract in HISTORY_COLUMNS])


def render_metric_figures(reports: list[dict], path: Path) -> None:
    """Eight panels, one per metric family, over utterance index."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = {
        name: [extract(r) for r in reports] for name, extract in HISTORY_COLUMNS
    }
    xs = rows["utterance"]
    fig, axes = plt.subplots(2, 4, figsize=(16, 7), sharex=True)
    for ax, (title, series) in zip(axes.flat, _PANELS):
        for column, label in series:
            ax.plot(xs, rows[column], marker="o", markersize=3, label=label)
        ax.set_title(title, fontsize=10)
        ax.grid(True, alpha=0.3)
        if len(series) > 1:
            ax.legend(fontsize=8)
    for ax in axes[1]:
        ax.set_xlabel("utterance")
    fig.suptitle("Solving metrics over the discussion")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _layout(graph: dict) -> dict[str, tuple[float, float]]:
    """Deterministic layered layout: detailing descends, exploration fans out."""
    icns = graph.get("icns", {})
    children: dict[str, list[tuple[str, str]]] = {}
    incoming: set[str] = set()
    for e in graph.get("edges", ()):
        if e["kind"] in ("detailing", "exploration"):
            children.setdefault(e["src"], []).append((e["kind"], e["dst"]))
            incoming.add(e["dst"])
    roots = [i for i in sorted(icns) if i not in incoming]

    pos: dict[str, tuple[float, float]] = {}
    next_x = [0.0]

    def place(node: str, depth: float) -> float:
        kids = sorted(children.get(node, []))
        if not kids:
            x = next_x[0]
            next_x[0] += 1.0
        else:
            xs = [
                place(dst, depth + (1.0 if kind == "detailing" else 0.6))
                for kind, dst in kids
            ]
            x = sum(xs) / len(xs)
        pos[node] = (x, -depth)
        return x

    for root in roots:
        place(root, 0.0)
        next_x[0] += 0.5
    return pos


def render_graph_figure(graph: dict, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pos = _layout(graph)
    icns = graph.get("icns", {})
    fig, ax = plt.subplots(figsize=(max(8, 1.6 * len(icns)), 6))
    styles = {"detailing": "-", "exploration": "--", "causality": ":", "generalization": "-."}
    for e in graph.get("edges", ()):
        if e["src"] not in pos or e["dst"] not in pos:
            continue
        (x1, y1), (x2, y2) = pos[e["src"]], pos[e["dst"]]
        ax.annotate(
            "",
            xy=(x2, y2 + 0.08),
            xytext=(x1, y1 - 0.08),
            arrowprops={"arrowstyle": "->", "linestyle": styles.get(e["kind"], "-"), "color": "gray"},
        )
    for icn_id, (x, y) in pos.items():
        image = icns.get(icn_id, {}).get("image", "")
        members = len(icns.get(icn_id, {}).get("members", ()))
        ax.text(
            x,
            y,
            f"{icn_id}\n{image}\n({members})",
            ha="center",
            va="center",
            fontsize=8,
            bbox={"boxstyle": "round", "facecolor": "lightyellow", "edgecolor": "black"},
        )
    ax.set_axis_off()
    ax.set_title("Idea cluster graph")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def write_summary(snapshot: dict, reports: list[dict], path: Path) -> None:
    """Human-readable run summary."""
    graph = snapshot["graph"]
    final = reports[-1] if reports else snapshot["metrics"]
    lines = [
        f"session: {snapshot['session'] or '(unnamed)'}",
        f"utterances processed: {len(reports)}",
        f"clusters: {len(graph['icns'])}, edges: {len(graph['edges'])}, roots: {len(graph['roots'])}",
        "",
        "clusters:",
    ]
    for icn_id in sorted(graph["icns"]):
        icn = graph["icns"][icn_id]
        members = ", ".join(m["verb"] or "-" for m in icn["members"])
        lines.append(
            f"  {icn_id} [{icn['image']}] members={len(icn['members'])}"
            f" te={{{', '.join(icn['te'])}}} verbs=({members})"
        )
    lines += [
        "",
        "final metrics:",
        f"  fulfilled: {final['fulfilled_requirements']['count']}"
        f" ({final['fulfilled_requirements']['ratio']:.2f})",
        f"  exploration: {final['exploration']['alternative_count']} alternatives,"
        f" {final['exploration']['switch_count']} switches",
        f"  substantiated: {final['substantiated_decisions']['ratio']:.2f}"
        f" ({final['substantiated_decisions']['orphan_count']} orphans)",
        f"  backtracking: {final['backtracking']['count']}"
        f" ({final['backtracking']['resolved_count']} resolved)",
        f"  contradictions: {final['contradictions']['count']}",
        f"  repetitions: {final['repetitions']['count']}"
        f" ({final['repetitions']['productive_count']} productive)",
        f"  unconsidered needs: {final['unconsidered_needs']['count']}",
        f"  unexplored items: {final['unexplored_items']['count']}",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
