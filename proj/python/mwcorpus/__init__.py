import json

from mwcorpus._core import (
    ConfigError,
    Error,
    IoError,
    ProtocolError,
    SchemaError,
    XmlError,
    apply_thresholds,
    compute_hash,
    continuous_scale_to_label,
    corpus_stats,
    fit_thresholds,
    geometric_mean_perplexity,
    heuristic_score,
    ingest_dump,
    macro_f1,
    normalize_line,
    passage_weight,
)
from mwcorpus import _core


def parse_page(title, wikicode, language="en", last_revision="2024-01-01T00:00:00Z"):
    """Parse one page into an article dict."""
    return json.loads(_core.parse_page(title, wikicode, language, last_revision))


def read_chunk(path):
    """Yield validated article dicts from a chunk file."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                yield json.loads(normalize_line(line.rstrip("\n")))


def run_pipeline(config_path):
    """Run the configured stages and return the run report as a dict."""
    return json.loads(_core.run_pipeline(str(config_path)))
