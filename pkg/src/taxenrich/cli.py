"""Command line entry point: build, classify, eval, sweep-tau, dump.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import contextlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import fields

from taxenrich import classifier, concept_kb, concept_vectors, entity_typing, enrichment, evaluation, taxonomy
from taxenrich.config import PATH_KEYS, ConfigError, PipelineConfig, load_config
from taxenrich.errors import DataError, PipelineError

log = logging.getLogger("taxenrich")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@contextlib.contextmanager
def stage(name):
    try:
        yield
    except (DataError, OSError, ValueError, KeyError) as exc:
        raise PipelineError(name, exc) from exc


def _write_atomic(path, text):
    """Replace ``path`` with ``text`` in one step so readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _emit(text, out):
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _write_list(path, items):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{x}\n" for x in items)


def cmd_build(cfg, out_dir):
    """Run ingest -> vectors -> typing -> enrichment -> centroids and write a model directory."""
    try:
        cfg.validate(require_inputs=True)
    except ConfigError as exc:
        raise PipelineError("config", exc) from exc
    with stage("taxonomy.load"):
        tax = taxonomy.load_taxonomy(cfg.taxonomy, cfg.documents)
    with stage("taxonomy.filter"):
        tax = taxonomy.filter_taxonomy(tax, cfg.max_depth, cfg.min_docs_subtree)
    with stage("concept_kb.load"):
        kb = concept_kb.load_kb(cfg.kb_pairs)
    with stage("concept_kb.similarity"):
        if cfg.similarity:
            simtab = concept_kb.load_similarity(cfg.similarity, cfg.similarity_mode)
        else:
            simtab = concept_kb.ConceptSimilarity(cfg.similarity_mode)
    with stage("concept_vectors.collect_stats"):
        stats = concept_vectors.collect_stats(tax, kb, cfg.max_len)
        base = concept_vectors.base_vectors(stats, tax)
    with stage("concept_vectors.enrich"):
        enriched_vecs = concept_vectors.enrich_vectors(base, tax, cfg.alpha)
    with stage("entity_typing.type_entities"):
        typed = entity_typing.type_entities(kb, cfg.beta)
    with stage("enrichment.attach_entities"):
        enriched = enrichment.attach_entities(enriched_vecs, typed, simtab, kb, cfg.k, cfg.temperature, tax)
    with stage("classifier.build_model"):
        lexicon = concept_kb.build_entity_lexicon(kb, cfg.lexicon_min_total)
        model = classifier.build_model(
            tax, enriched, lexicon, cfg.alpha_centroid, cfg.tau, cfg.k, cfg.ancestor_alpha
        )
    with stage("classifier.save"):
        os.makedirs(out_dir, exist_ok=True)
        concept_vectors.dump_vectors(base, tax, os.path.join(out_dir, "category_vectors.tsv"))
        concept_vectors.dump_vectors(enriched_vecs, tax, os.path.join(out_dir, "enriched_vectors.tsv"))
        entity_typing.dump_typed(typed, os.path.join(out_dir, "entity_typing.tsv"))
        _write_list(os.path.join(out_dir, "skipped_entities.txt"), enriched.skipped)
        inputs = {
            key: classifier.sha256_file(getattr(cfg, key))
            for key in PATH_KEYS
            if key != "annotations" and getattr(cfg, key)
        }
        params = dict(cfg.parameters(), inputs=inputs)
        classifier.save_model(
            model, out_dir, params,
            extra_files=("category_vectors.tsv", "enriched_vectors.tsv", "entity_typing.tsv", "skipped_entities.txt"),
        )
    return {
        "categories": len(tax),
        "documents": tax.n_documents(),
        "entities_typed": len(typed),
        "entities_attached": len(enriched.attachments_by_entity),
        "entities_skipped": len(enriched.skipped),
        "empty_centroids": len(model.empty_categories),
    }


def _load_model(model_dir):
    with stage("classifier.load_model"):
        return classifier.load_model(model_dir)


def cmd_classify(model_dir, input_file, k=None, tau=None):
    model = _load_model(model_dir)
    with stage("classifier.classify"):
        if tau is not None and not 0.0 <= tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        return "".join(
            classifier.format_classification(lineno, result, model.tax)
            for lineno, result in classifier.classify_file(model, input_file, k, tau)
        )


def cmd_eval(results_file, annotations_file, ks, count_somewhat=False, fmt="classification"):
    with stage("evaluation.evaluate_run"):
        return evaluation.evaluate_run(results_file, annotations_file, ks, count_somewhat, fmt)


def cmd_sweep_tau(model_dir, input_file, annotations_file, tau_grid, k=None, count_somewhat=False):
    """Precision@k for every tau in ``tau_grid``, scoring each input once."""
    model = _load_model(model_dir)
    k = model.k if k is None else k
    if any(not 0.0 <= t <= 1.0 for t in tau_grid):
        raise PipelineError("classifier.sweep_tau", "tau grid values must lie in [0, 1]")
    with stage("evaluation.load_annotations"):
        judg = evaluation.load_annotations(annotations_file)
    with stage("classifier.sweep_tau"):
        with open(input_file, encoding="utf-8") as fh:
            cached = [
                (str(lineno), classifier.score_components(model, line.rstrip("\r\n")))
                for lineno, line in enumerate(fh, 1)
            ]
        rows = []
        for tau in tau_grid:
            rankings = {}
            for item, (term, entity, _) in cached:
                final = classifier.combine(term, entity, tau)
                rankings[item] = [model.tax.path_of(cid) for cid in enrichment.rank_categories(final, k)]
            report = evaluation.evaluate_rankings(rankings, judg, [k], count_somewhat)
            rows.append((tau, report.precision_at[k]))
    return k, rows


def format_sweep(k, rows):
    return f"tau\tprecision@{k}\n" + "".join(f"{tau:g}\t{p:.6f}\n" for tau, p in rows)


def cmd_dump(path, head=None):
    if os.path.isdir(path):
        manifest = classifier.verify_model(path)
        return json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    if head is not None:
        lines = lines[:head]
    return "".join(lines)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="taxenrich", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build", help="build a model directory from a config file")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", required=True, help="model directory to write")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type is bool:
            p.add_argument(flag, dest=f.name, default=None, action="store_const", const="true")
        else:
            p.add_argument(flag, dest=f.name, default=None)

    p = sub.add_parser("classify", help="classify one text per input line")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--out")

    p = sub.add_parser("eval", help="precision@k of a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--ks", type=_int_list, default=[1, 3, 5])
    p.add_argument("--count-somewhat", action="store_true")
    p.add_argument("--format", choices=("classification", "attachments"), default="classification")
    p.add_argument("--out")

    p = sub.add_parser("sweep-tau", help="precision@k over a grid of entity weights")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--grid", type=_float_list, default=[i / 10 for i in range(11)])
    p.add_argument("--k", type=int)
    p.add_argument("--count-somewhat", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("dump", help="print an artifact file, or verify and print a model manifest")
    p.add_argument("path")
    p.add_argument("--head", type=int)
    return parser


def _run(args):
    if args.command == "build":
        overrides = {f.name: getattr(args, f.name) for f in fields(PipelineConfig) if getattr(args, f.name) is not None}
        try:
            cfg = load_config(args.config, overrides)
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
        except OSError as exc:
            raise PipelineError("config", exc) from None
        summary = cmd_build(cfg, args.out)
        print(" ".join(f"{k}={v}" for k, v in summary.items()))
    elif args.command == "classify":
        if args.k is not None and args.k < 1:
            raise UsageError("--k must be >= 1")
        _emit(cmd_classify(args.model, args.input, args.k, args.tau), args.out)
    elif args.command == "eval":
        if not args.ks or min(args.ks) < 1:
            raise UsageError("--ks needs positive integers")
        report = cmd_eval(args.results, args.annotations, args.ks, args.count_somewhat, args.format)
        _emit(evaluation.format_report(report), args.out)
    elif args.command == "sweep-tau":
        k, rows = cmd_sweep_tau(args.model, args.input, args.annotations, args.grid, args.k, args.count_somewhat)
        _emit(format_sweep(k, rows), args.out)
    elif args.command == "dump":
        with stage("dump"):
            sys.stdout.write(cmd_dump(args.path, args.head))
    else:
        raise UsageError("a command is required: build, classify, eval, sweep-tau, dump")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        _run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
