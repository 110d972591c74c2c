"""Hybrid program kernel: run, expand, and edit programs with embedded VIsx."""

from ._hvx import HvxError, Server, Session, corpus_dir, datum_to_json, expand, json_to_datum, read_print, run

__all__ = ["HvxError", "Server", "Session", "corpus_dir", "datum_to_json", "expand", "json_to_datum", "read_print", "run"]
