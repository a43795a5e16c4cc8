"""Python bindings for the patternd pattern library and service core."""

from ._core import (
    ConfigError,
    EvalError,
    ParseError,
    Server,
    ServerConfig,
    Service,
    Session,
    apply_discount,
    build_config,
    count_nodes,
    escape_doc,
    eval_expr,
    format_money,
    player_press,
    prepare_document,
    print_expr,
    unescape_doc,
)

__all__ = [
    "ConfigError",
    "EvalError",
    "ParseError",
    "Server",
    "ServerConfig",
    "Service",
    "Session",
    "apply_discount",
    "build_config",
    "count_nodes",
    "escape_doc",
    "eval_expr",
    "format_money",
    "player_press",
    "prepare_document",
    "print_expr",
    "unescape_doc",
]
