"""Heuristic one-line usage examples for extracted API records.

Each record expands into the call forms a developer would plausibly write
at a call site: bare and module-qualified calls for Python functions,
instance/class-qualified calls for methods, constructor and assignment
forms, and typed declarations for Java methods returning non-primitive
types. Identical rendered forms collapse.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .api_extract import (
    CLASS_FUNCTION,
    CONSTRUCTOR,
    JAVA_CONSTRUCTOR,
    JAVA_INNER_CLASS_METHOD,
    JAVA_METHOD,
    REGULAR_FUNCTION,
    ApiRecord,
    is_complex_java_type,
    java_base_type_name,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class UsageExample:
    text: str  # a single line
    form_id: str


def snake_case(name: str) -> str:
    """CamelCase -> snake_case; consecutive capitals count as one word."""
    s = re.sub(r"([A-Z]+)([A-Z][a-z])", r"\1_\2", name)
    s = re.sub(r"([a-z0-9])([A-Z])", r"\1_\2", s)
    return s.lower()


def camel_case(name: str) -> str:
    """Lowercase the first letter only."""
    return name[:1].lower() + name[1:] if name else name


def synth_usage_examples(record: ApiRecord) -> list[UsageExample]:
    """Deterministic usage-example forms for ``record``, deduplicated."""
    builders = {
        REGULAR_FUNCTION: _python_regular_forms,
        CLASS_FUNCTION: _python_class_function_forms,
        CONSTRUCTOR: _python_constructor_forms,
        JAVA_METHOD: _java_method_forms,
        JAVA_CONSTRUCTOR: _java_constructor_forms,
        JAVA_INNER_CLASS_METHOD: _java_inner_class_forms,
    }
    builder = builders.get(record.kind)
    if builder is None:
        log.warning("no usage-example rule for kind %r (%s)", record.kind, record.name)
        return []
    forms = builder(record)
    seen: set[str] = set()
    out: list[UsageExample] = []
    for text, form_id in forms:
        if text in seen:
            continue
        seen.add(text)
        out.append(UsageExample(text=text, form_id=form_id))
    return out


def _args(record: ApiRecord) -> str:
    return ", ".join(record.param_names)


def _python_regular_forms(record: ApiRecord) -> list[tuple[str, str]]:
    stem = Path(record.file).stem
    args = _args(record)
    return [
        (f"{record.name}({args})", "py_regular_args"),
        (f"{stem}.{record.name}({args})", "py_regular_qualified_args"),
        (f"{record.name}()", "py_regular_noargs"),
        (f"{stem}.{record.name}()", "py_regular_qualified_noargs"),
    ]


def _python_class_function_forms(record: ApiRecord) -> list[tuple[str, str]]:
    cls = record.class_name or ""
    instance = snake_case(cls)
    args = _args(record)
    return [
        (f"{instance}.{record.name}({args})", "py_class_instance_args"),
        (f"{cls}.{record.name}({args})", "py_class_static_args"),
        (f"{instance}.{record.name}()", "py_class_instance_noargs"),
        (f"{cls}.{record.name}()", "py_class_static_noargs"),
    ]


def _python_constructor_forms(record: ApiRecord) -> list[tuple[str, str]]:
    cls = record.class_name or ""
    instance = snake_case(cls)
    args = _args(record)
    return [
        (f"{cls}({args})", "py_ctor_args"),
        (f"{instance} = {cls}({args})", "py_ctor_assign_args"),
        (f"{cls}()", "py_ctor_noargs"),
        (f"{instance} = {cls}()", "py_ctor_assign_noargs"),
    ]


def _java_method_forms(record: ApiRecord) -> list[tuple[str, str]]:
    cls = record.class_name or ""
    instance = camel_case(cls)
    args = _args(record)
    forms = [(f"{instance}.{record.name}({args})", "java_method_instance")]
    if record.is_static:
        forms.append((f"{cls}.{record.name}({args})", "java_method_static"))
    if is_complex_java_type(record.return_type):
        var = camel_case(java_base_type_name(record.return_type))
        forms.append(
            (
                f"{record.return_type} {var} = {instance}.{record.name}({args})",
                "java_method_typed_decl",
            )
        )
    return forms


def _java_constructor_forms(record: ApiRecord) -> list[tuple[str, str]]:
    cls = record.class_name or ""
    var = camel_case(cls)
    args = _args(record)
    return [
        (f"{cls} {var} = new {cls}({args})", "java_ctor_assign"),
        (f"new {cls}({args})", "java_ctor_new"),
    ]


def _java_inner_class_forms(record: ApiRecord) -> list[tuple[str, str]]:
    outer = record.outer_classes[-1] if record.outer_classes else (record.class_name or "")
    inner = record.class_name or ""
    args = _args(record)
    return [
        (
            f"{camel_case(outer)}.{camel_case(inner)}.{record.name}({args})",
            "java_inner_method",
        )
    ]
