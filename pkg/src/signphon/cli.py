"""Command-line front end.

Subcommands: validate, fit, report, coartic, disambiguate, rerank-sim.

Settings resolve in the order defaults < ``--config`` JSON file < ``SIGNPHON_*``
environment variables < command-line flags. Exit status is 0 on success, 1
when the command ran and found something (lexicon violations, no usable
tokens), and 2 when an input could not be read or parsed.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from . import __version__
from .coarticulation import DetectorThresholds, scan
from .corpus import CorpusError, ExclusionPolicy, Utterance, filter_tokens, parse_corpus
from .disambiguator import dumps_interpretations, interpret_utterance
from .inventory import Inventory, InventoryError, load_default_inventory, load_inventory
from .lexicon import (IllFormedSign, Lexicon, LexiconError, classify_sign_type,
                      load_default_lexicon, parse_lexicon, validate_entry)
from .reranker import NoiseModel, evaluate, load_dataset, save_dataset, synth_generate
from .transitions import (SmoothingConfig, StatsError, TransitionTable, dumps_stats, fit,
                          joint_prior, load_shipped_stats, load_stats, report)

ENV_PREFIX = "SIGNPHON_"
EXIT_OK, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2

# name -> (type, default); these may come from config, environment or flags
SETTINGS = {
    "inventory": (str, None),
    "lexicon": (str, None),
    "corpus": (list, []),
    "stats": (str, None),
    "alpha": (float, 0.1),
    "lambda": (float, 1.0),
    "kappa": (float, 0.5),
    "sigma": (float, 0.5),
    "tau_subtle": (float, 0.5),
    "tau_major": (float, 1.0),
    "seed": (int, 42),
    "n": (int, 10_000),
    "output_format": (str, "text"),
}


class InputError(Exception):
    """Bad configuration or unreadable input; maps to exit status 2."""


@dataclass
class RunConfig:
    inventory: Inventory
    lexicon: Lexicon
    corpus: list = field(default_factory=list)
    stats_path: str | None = None
    alpha: float = 0.1
    lam: float = 1.0
    kappa: float = 0.5
    sigma: float = 0.5
    tau_subtle: float = 0.5
    tau_major: float | None = 1.0
    seed: int = 42
    n: int = 10_000
    output_format: str = "text"
    output: str | None = None
    dataset: str | None = None
    save_dataset: str | None = None


def _coerce(name: str, raw):
    kind, _ = SETTINGS[name]
    if name == "tau_major" and (raw is None or str(raw).lower() == "none"):
        return None
    try:
        if kind is list:
            if isinstance(raw, str):
                return [p for p in raw.split(os.pathsep) if p]
            return [str(p) for p in raw]
        return kind(raw)
    except (TypeError, ValueError):
        raise InputError(f"bad value for {name}: {raw!r}") from None


def resolve_settings(args: argparse.Namespace, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    values = {k: d for k, (_, d) in SETTINGS.items()}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise InputError(f"config {args.config}: expected a JSON object")
        for k, v in cfg.items():
            key = k.replace("-", "_")
            if key not in SETTINGS:
                raise InputError(f"config {args.config}: unknown setting {k!r}")
            values[key] = _coerce(key, v)
    for key in SETTINGS:
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = _coerce(key, raw)
    for key in SETTINGS:
        v = getattr(args, key, None)
        if v is not None and v != []:
            values[key] = _coerce(key, v)
    return values


def _check_ranges(v: dict) -> None:
    if v["alpha"] < 0:
        raise InputError("--alpha must be non-negative")
    for name in ("lambda", "kappa"):
        if not 0.0 <= v[name] <= 1.0:
            raise InputError(f"--{name} must lie in [0, 1]")
    if v["sigma"] <= 0:
        raise InputError("--sigma must be positive")
    if v["tau_subtle"] < 0:
        raise InputError("--tau-subtle must be non-negative")
    if v["n"] < 1:
        raise InputError("--n must be at least 1")
    if v["output_format"] not in ("json", "text"):
        raise InputError("--output-format must be json or text")


def _open_text(path: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def build_config(args: argparse.Namespace, environ=None) -> RunConfig:
    """Resolve settings and parse every input file up front."""
    v = resolve_settings(args, environ)
    _check_ranges(v)
    try:
        if v["inventory"]:
            with _open_text(v["inventory"]) as fh:
                inv = load_inventory(fh)
        else:
            inv = load_default_inventory()
        if v["lexicon"]:
            with _open_text(v["lexicon"]) as fh:
                lex = parse_lexicon(fh, inv)
        else:
            lex = load_default_lexicon(inv)
        corpus = []
        for path in v["corpus"]:
            with _open_text(path) as fh:
                try:
                    corpus.extend(parse_corpus(fh, inv))
                except CorpusError as exc:
                    raise InputError(f"{path}: {exc}") from None
        if v["stats"] and not os.path.exists(v["stats"]):
            raise InputError(f"{v['stats']}: no such file")
    except (InventoryError, LexiconError) as exc:
        raise InputError(str(exc)) from None
    return RunConfig(
        inventory=inv, lexicon=lex, corpus=corpus, stats_path=v["stats"], alpha=v["alpha"],
        lam=v["lambda"], kappa=v["kappa"], sigma=v["sigma"], tau_subtle=v["tau_subtle"],
        tau_major=v["tau_major"], seed=v["seed"], n=v["n"], output_format=v["output_format"],
        output=getattr(args, "output", None), dataset=getattr(args, "dataset", None),
        save_dataset=getattr(args, "save_dataset", None))


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _shipped_fixture(name: str) -> list[Utterance]:
    with resources.files("signphon.data").joinpath(name).open(encoding="utf-8") as fh:
        return parse_corpus(fh)


def _stats_table(cfg: RunConfig) -> TransitionTable:
    if cfg.stats_path:
        with _open_text(cfg.stats_path) as fh:
            try:
                return load_stats(fh, cfg.inventory)
            except StatsError as exc:
                raise InputError(f"{cfg.stats_path}: {exc}") from None
    if cfg.corpus:
        return fit(filter_tokens(cfg.corpus), cfg.inventory)
    return load_shipped_stats(cfg.inventory)


def cmd_validate(cfg: RunConfig, out) -> int:
    rows = []
    bad = 0
    for gloss, entry in cfg.lexicon.items():
        rep = validate_entry(entry, cfg.inventory)
        try:
            sign_type = classify_sign_type(entry, cfg.inventory)
        except IllFormedSign:
            sign_type = None
        problems = rep.violations()
        bad += bool(problems)
        rows.append({"gloss": gloss, "well_formed": rep.well_formed, "sign_type": sign_type,
                     "symmetry": rep.symmetry.status, "dominance": rep.dominance.status,
                     "violations": problems})
    if cfg.output_format == "json":
        out.write(_json({"entries": rows, "n_entries": len(rows), "n_violating": bad}))
    else:
        for r in rows:
            if r["violations"]:
                for msg in r["violations"]:
                    out.write(f"{r['gloss']}: {msg}\n")
        out.write(f"{len(rows)} entries, {bad} with violations\n")
    return EXIT_FINDINGS if bad else EXIT_OK


def cmd_fit(cfg: RunConfig, out) -> int:
    table = fit(filter_tokens(cfg.corpus), cfg.inventory)
    text = dumps_stats(table)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    summary = {"rows": [{"start": s, "total": t} for s, t in
                        sorted(table.start_totals.items(), key=lambda kv: (-kv[1], kv[0]))],
               "total": table.total, "skipped": table.skipped}
    if cfg.output_format == "json":
        out.write(text if not cfg.output else _json(summary))
    else:
        for r in summary["rows"]:
            out.write(f"{r['start']}\t{r['total']}\n")
        out.write(f"total {table.total}, skipped {table.skipped}\n")
    return EXIT_OK if table.total else EXIT_FINDINGS


def cmd_report(cfg: RunConfig, out) -> int:
    chart = report(_stats_table(cfg), SmoothingConfig(cfg.alpha))
    out.write(_json(chart.to_json()) if cfg.output_format == "json" else chart.render())
    return EXIT_OK


def cmd_coartic(cfg: RunConfig, out) -> int:
    corpus = cfg.corpus or _shipped_fixture("coartic_fixture.jsonl")
    thresholds = DetectorThresholds(tau_subtle=cfg.tau_subtle, tau_major=cfg.tau_major)
    rep = scan(corpus, cfg.lexicon, cfg.inventory, ExclusionPolicy(), thresholds)
    out.write(_json(rep.to_json()) if cfg.output_format == "json" else rep.render())
    return EXIT_OK


def cmd_disambiguate(cfg: RunConfig, out) -> int:
    for utt in cfg.corpus:
        results = interpret_utterance(utt, cfg.lexicon, cfg.inventory)
        if cfg.output_format == "json":
            out.write(dumps_interpretations(utt, results))
        else:
            for r in results:
                tag = r.tag or "-"
                out.write(f"{utt.id}\t{r.label}\t{r.verdict}\t{tag}\t{r.confidence:.2f}\t"
                          f"{','.join(r.fired_rules)}\n")
    return EXIT_OK


def cmd_rerank_sim(cfg: RunConfig, out) -> int:
    prior = joint_prior(_stats_table(cfg), SmoothingConfig(cfg.alpha))
    if cfg.dataset:
        with _open_text(cfg.dataset) as fh:
            try:
                data = load_dataset(fh)
            except ValueError as exc:
                raise InputError(f"{cfg.dataset}: {exc}") from None
    else:
        noise = NoiseModel(kappa=cfg.kappa, sigma=cfg.sigma, seed=cfg.seed)
        data = synth_generate(prior, noise, cfg.n, cfg.inventory)
    if cfg.save_dataset:
        with open(cfg.save_dataset, "w", encoding="utf-8") as fh:
            save_dataset(data, fh)
    try:
        metrics = evaluate(data, prior, cfg.lam)
        baseline = evaluate(data, prior, 0.0)
    except KeyError as exc:
        raise InputError(f"dataset: {exc}") from None
    result = {"lambda": cfg.lam, "n": len(data), "metrics": metrics, "baseline_lambda0": baseline}
    if not cfg.dataset:
        result.update(kappa=cfg.kappa, sigma=cfg.sigma, seed=cfg.seed)
    if cfg.output_format == "json":
        out.write(_json(result))
    else:
        out.write(f"samples {len(data)}\n")
        out.write(f"lambda {cfg.lam:g}: rank-1 accuracy {metrics['rank1_accuracy']:.4f}, "
                  f"MRR {metrics['mean_reciprocal_rank']:.4f}\n")
        out.write(f"lambda 0: rank-1 accuracy {baseline['rank1_accuracy']:.4f}, "
                  f"MRR {baseline['mean_reciprocal_rank']:.4f}\n")
    return EXIT_OK


COMMANDS = {
    "validate": (cmd_validate, "check every lexicon entry against the two-hand conditions"),
    "fit": (cmd_fit, "count dominant-hand start/end pairs in a corpus"),
    "report": (cmd_report, "render the start/end frequency chart"),
    "coartic": (cmd_coartic, "scan a corpus for handshape coarticulation"),
    "disambiguate": (cmd_disambiguate, "interpret non-dominant hand activity per segment"),
    "rerank-sim": (cmd_rerank_sim, "simulate noisy recognition and re-rank with the prior"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("inputs and settings")
    g.add_argument("--config", help="JSON file of settings (flags win)")
    g.add_argument("--inventory", help="handshape inventory TSV (default: shipped)")
    g.add_argument("--lexicon", help="lexicon TSV (default: shipped)")
    g.add_argument("--corpus", action="append", default=[], help="corpus JSONL; repeatable")
    g.add_argument("--stats", help="stats JSON (default: shipped chart)")
    g.add_argument("--alpha", type=float, help="additive smoothing constant")
    g.add_argument("--lambda", dest="lambda", type=float, help="prior exponent in [0, 1]")
    g.add_argument("--kappa", type=float, help="noise level in [0, 1]")
    g.add_argument("--sigma", type=float, help="noise kernel width")
    g.add_argument("--tau-subtle", dest="tau_subtle", type=float)
    g.add_argument("--tau-major", dest="tau_major", help="major-severity threshold or 'none'")
    g.add_argument("--seed", type=int)
    g.add_argument("--n", type=int, help="number of simulated samples")
    g.add_argument("--output-format", dest="output_format", choices=("json", "text"))

    p = argparse.ArgumentParser(prog="signphon", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "fit":
            sp.add_argument("--output", help="write the stats file here")
        if name == "rerank-sim":
            sp.add_argument("--dataset", help="evaluate this JSONL dataset instead of simulating")
            sp.add_argument("--save-dataset", dest="save_dataset", help="write the samples here")
    return p


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None, environ=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    func, _ = COMMANDS[args.command]
    buf = io.StringIO()
    try:
        cfg = build_config(args, environ)
        status = func(cfg, buf)
    except (InputError, StatsError, CorpusError) as exc:
        stderr.write(f"signphon {args.command}: {exc}\n")
        return EXIT_INPUT
    stdout.write(buf.getvalue())
    return status


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
