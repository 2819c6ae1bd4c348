"""Benchmark suites and deterministic report rendering.

Three suites: `safeness` (per-rule opt-identity pass counts), `edge-bound`
(edge counts against the linear c*p*n bound plus decomposition widths over an
(n, p) sweep), and `kernel` (kernel size ratios |V'|/(p^4 k) as the natural
budget grows).  All randomness derives from one master seed, no timestamps are
recorded, and rows are emitted in a canonical order, so reports for the same
seed are byte-identical.
"""

from .errors import PdkError
from .generators import generate_system
from .graphs import build_intersection_graph
from .oracle import brute_force_fvs, check_rule_safeness
from .rng import child_seed
from .solver import kernel_statistics
from .treewidth import tree_decomposition

SUITES = ("safeness", "edge-bound", "kernel")

RULES = ("R0", "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10")
SAFENESS_TRIALS = {"R8": 50}
SAFENESS_DEFAULT_TRIALS = 100

EDGE_NS = (50, 100, 200)
EDGE_PLIES = (2, 3, 4, 5)
EDGE_SEEDS = 5

KERNEL_NS = (10, 13, 16)
KERNEL_SEEDS = 5

_COLUMNS = {
    "safeness": ("rule", "trials", "passed", "synth_failures",
                 "safeness_failures"),
    "edge-bound": ("n", "p", "seed", "edges", "pn", "edge_ratio", "width",
                   "width_ratio"),
    "kernel": ("n", "seed", "k", "p", "branches", "kernel_size",
               "size_ratio"),
}


def _suite_safeness(seed: int, scale: float = 1.0):
    rows = []
    for rule in RULES:
        trials = SAFENESS_TRIALS.get(rule, SAFENESS_DEFAULT_TRIALS)
        trials = max(1, int(trials * scale))
        rep = check_rule_safeness(rule, trials=trials, seed=seed)
        rows.append({"rule": rule, "trials": rep.trials,
                     "passed": rep.passed,
                     "synth_failures": rep.synth_failures,
                     "safeness_failures": rep.safeness_failures})
    summary = {
        "rules": len(rows),
        "all_pass": int(all(r["passed"] == r["trials"] for r in rows)),
    }
    return rows, summary


def _suite_edge_bound(seed: int, scale: float = 1.0):
    rows = []
    seeds = max(1, int(EDGE_SEEDS * scale))
    ns = EDGE_NS if scale >= 1.0 else EDGE_NS[:2]
    for n in ns:
        for p in EDGE_PLIES:
            for i in range(seeds):
                s = child_seed(seed, "edge-bound", n, p, i) % (1 << 30)
                system = generate_system("squares", n, s, ply=p)
                g = build_intersection_graph(system)
                e = len(g.edges())
                width = tree_decomposition(g).width
                rows.append({
                    "n": n, "p": p, "seed": i, "edges": e, "pn": p * n,
                    "edge_ratio": e / float(p * n),
                    "width": width,
                    "width_ratio": width / float(p * n) ** 0.5})
    summary = {}
    slopes = {}
    for n in ns:
        sub = [r for r in rows if r["n"] == n]
        num = sum(r["edges"] * r["pn"] for r in sub)
        den = sum(r["pn"] ** 2 for r in sub)
        slope = num / float(den)
        ss_res = sum((r["edges"] - slope * r["pn"]) ** 2 for r in sub)
        ss_tot = sum(r["edges"] ** 2 for r in sub)
        slopes[n] = slope
        summary["slope_n%d" % n] = slope
        summary["r2_n%d" % n] = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    mean = sum(slopes.values()) / len(slopes)
    summary["slope_mean"] = mean
    summary["slope_max_dev_pct"] = 100.0 * max(
        abs(s - mean) / mean for s in slopes.values())
    summary["width_ratio_max"] = max(r["width_ratio"] for r in rows)
    return rows, summary


def _suite_kernel(seed: int, scale: float = 1.0):
    rows = []
    seeds = max(1, int(KERNEL_SEEDS * scale))
    for n in KERNEL_NS:
        for i in range(seeds):
            s = child_seed(seed, "kernel", n, i) % (1 << 30)
            system = generate_system("squares", n, s, density=1.15)
            g = build_intersection_graph(system)
            k = brute_force_fvs(g).opt
            if k == 0:
                continue
            ks = kernel_statistics(system, k)
            size = max((t["final_n"] for t in ks["tuples"]), default=0)
            ratio = max((t["size_ratio"] for t in ks["tuples"]), default=0.0)
            rows.append({"n": n, "seed": i, "k": k, "p": ks["p"],
                         "branches": ks["branches"], "kernel_size": size,
                         "size_ratio": ratio})
    by_k = {}
    for r in rows:
        by_k.setdefault(r["k"], []).append(r["size_ratio"])
    summary = {}
    for k in sorted(by_k):
        summary["mean_ratio_k%d" % k] = sum(by_k[k]) / len(by_k[k])
    return rows, summary


def run_suite(name: str, seed: int = 0, scale: float = 1.0) -> dict:
    """One completed suite: canonical rows plus aggregate summary."""
    if name == "safeness":
        rows, summary = _suite_safeness(seed, scale)
    elif name == "edge-bound":
        rows, summary = _suite_edge_bound(seed, scale)
    elif name == "kernel":
        rows, summary = _suite_kernel(seed, scale)
    else:
        raise PdkError("unknown bench suite %r (choose from %s)"
                       % (name, ", ".join(SUITES)))
    return {"suite": name, "seed": seed, "rows": rows, "summary": summary}


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.6f" % value
    if value is None:
        return ""
    return str(value)


def bench_report(results) -> tuple:
    """Render completed suites as (markdown, csv); both fully deterministic."""
    md = ["# bench report", ""]
    csv = ["suite,row,field,value"]
    for res in results:
        name = res["suite"]
        cols = _COLUMNS[name]
        md.append("## %s (seed %s)" % (name, res["seed"]))
        md.append("")
        md.append("| " + " | ".join(cols) + " |")
        md.append("|" + "|".join("---" for _ in cols) + "|")
        for i, row in enumerate(res["rows"]):
            md.append("| " + " | ".join(_fmt(row[c]) for c in cols) + " |")
            for c in cols:
                csv.append("%s,%d,%s,%s" % (name, i, c, _fmt(row[c])))
        md.append("")
        for key in sorted(res["summary"]):
            md.append("- %s: %s" % (key, _fmt(res["summary"][key])))
            csv.append("%s,summary,%s,%s" % (name, key,
                                             _fmt(res["summary"][key])))
        md.append("")
    if not results:
        md.append("(no completed runs)")
        md.append("")
    return "\n".join(md) + "\n", "\n".join(csv) + "\n"
