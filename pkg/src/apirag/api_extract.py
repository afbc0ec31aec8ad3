"""Extraction of function/method records from parsed source files.

Each record captures the four facts retrieval needs: the signature, the
owning class (if any), the body text, and the defining file. Python files
are walked with the stdlib AST; Java files with a token-level structural
parser that tracks class nesting and brace depth.
"""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass

from .lexer import JAVA, PYTHON, LexToken, lex
from .corpus import SourceFile

log = logging.getLogger(__name__)

REGULAR_FUNCTION = "regular_function"
CLASS_FUNCTION = "class_function"
CONSTRUCTOR = "constructor"
JAVA_METHOD = "java_method"
JAVA_CONSTRUCTOR = "java_constructor"
JAVA_INNER_CLASS_METHOD = "java_inner_class_method"

JAVA_PRIMITIVE_TYPES = frozenset(
    {"void", "boolean", "byte", "char", "short", "int", "long", "float", "double", "String"}
)

_JAVA_MODIFIERS = frozenset(
    {"public", "private", "protected", "static", "final", "abstract",
     "synchronized", "native", "strictfp", "default", "transient", "volatile"}
)


@dataclass(frozen=True)
class ApiRecord:
    name: str
    signature: str
    class_name: str | None
    enclosing_class_decl: str | None
    body: str
    file: str
    language: str
    kind: str
    is_static: bool
    param_names: tuple[str, ...]
    return_type: str | None
    outer_classes: tuple[str, ...] = ()  # enclosing classes outside class_name, outermost first


def extract_apis(file: SourceFile) -> list[ApiRecord]:
    """All function/method definitions of ``file``, nested classes included.

    Nested functions (def inside def) and lambdas are not project API
    surface and are skipped. A file flagged parse_failed yields nothing.
    """
    if file.parse_failed:
        log.warning("no APIs extracted from unparseable file %s", file.path)
        return []
    if file.language == PYTHON:
        return _extract_python(file)
    return _extract_java(file)


def internal_filter(records: list[ApiRecord], repo_files: set[str]) -> list[ApiRecord]:
    """Keep only records defined by a file inside the repository."""
    return [r for r in records if r.file in repo_files]


# ---------------------------------------------------------------------------
# Python


def _extract_python(file: SourceFile) -> list[ApiRecord]:
    source = file.text
    tree = ast.parse(source)
    records: list[ApiRecord] = []
    _walk_python_body(file, source, tree.body, [], records)
    return records


def _walk_python_body(
    file: SourceFile,
    source: str,
    body: list[ast.stmt],
    class_stack: list[ast.ClassDef],
    records: list[ApiRecord],
) -> None:
    """Collect defs from a statement list, descending into compound statements.

    Never descends into function bodies: nested functions are not callable
    as project APIs. Defs guarded by if/try/with at module or class level
    are still definitions and are kept.
    """
    for node in body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            records.append(_python_record(file, source, node, class_stack=class_stack))
        elif isinstance(node, ast.ClassDef):
            _walk_python_body(file, source, node.body, class_stack + [node], records)
        elif isinstance(node, (ast.If, ast.While, ast.For, ast.AsyncFor)):
            _walk_python_body(file, source, node.body + node.orelse, class_stack, records)
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            _walk_python_body(file, source, node.body, class_stack, records)
        elif isinstance(node, ast.Try):
            handler_bodies = [stmt for h in node.handlers for stmt in h.body]
            _walk_python_body(
                file,
                source,
                node.body + node.orelse + node.finalbody + handler_bodies,
                class_stack,
                records,
            )


def _python_record(
    file: SourceFile,
    source: str,
    node: ast.FunctionDef | ast.AsyncFunctionDef,
    class_stack: list[ast.ClassDef],
) -> ApiRecord:
    decorators = {_decorator_name(d) for d in node.decorator_list}
    is_static = bool(decorators & {"staticmethod", "classmethod"})
    in_class = bool(class_stack)

    params = _python_param_names(node)
    if in_class and params and params[0] in ("self", "cls"):
        params = params[1:]

    prefix = "async def" if isinstance(node, ast.AsyncFunctionDef) else "def"
    signature = f"{prefix} {node.name}({ast.unparse(node.args)})"
    if node.returns is not None:
        signature += f" -> {ast.unparse(node.returns)}"

    if in_class:
        kind = CONSTRUCTOR if node.name == "__init__" else CLASS_FUNCTION
        cls = class_stack[-1]
        class_name = cls.name
        class_decl = file.lines[cls.lineno - 1].strip()
        outers = tuple(c.name for c in class_stack[:-1])
    else:
        kind = REGULAR_FUNCTION
        class_name = None
        class_decl = None
        outers = ()

    body = ast.get_source_segment(source, node) or signature
    return ApiRecord(
        name=node.name,
        signature=signature,
        class_name=class_name,
        enclosing_class_decl=class_decl,
        body=body,
        file=file.path,
        language=PYTHON,
        kind=kind,
        is_static=is_static,
        param_names=tuple(params),
        return_type=ast.unparse(node.returns) if node.returns is not None else None,
        outer_classes=outers,
    )


def _python_param_names(node: ast.FunctionDef | ast.AsyncFunctionDef) -> list[str]:
    a = node.args
    names = [p.arg for p in a.posonlyargs] + [p.arg for p in a.args]
    if a.vararg:
        names.append(a.vararg.arg)
    names.extend(p.arg for p in a.kwonlyargs)
    if a.kwarg:
        names.append(a.kwarg.arg)
    return names


def _decorator_name(node: ast.expr) -> str:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        return node.attr
    if isinstance(node, ast.Call):
        return _decorator_name(node.func)
    return ""


# ---------------------------------------------------------------------------
# Java


@dataclass
class _JavaClass:
    name: str
    decl_line: str


@dataclass
class _Cursor:
    tokens: list[LexToken]
    i: int = 0

    def peek(self, ahead: int = 0) -> LexToken | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> LexToken | None:
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def done(self) -> bool:
        return self.i >= len(self.tokens)


def _extract_java(file: SourceFile) -> list[ApiRecord]:
    text = file.text
    cur = _Cursor(lex(text, JAVA))
    records: list[ApiRecord] = []
    while not cur.done():
        tok = cur.peek()
        if tok.kind == "keyword" and tok.text in ("class", "interface", "enum"):
            _parse_java_class(file, text, cur, [], records)
        else:
            cur.next()
    return records


def _parse_java_class(
    file: SourceFile,
    text: str,
    cur: _Cursor,
    outer: list[_JavaClass],
    records: list[ApiRecord],
) -> None:
    kw = cur.next()  # class / interface / enum
    name_tok = cur.peek()
    if name_tok is None or name_tok.kind != "identifier":
        return
    cur.next()
    decl_line = file.lines[kw.line - 1].strip()
    cls = _JavaClass(name=name_tok.text, decl_line=decl_line)
    # skip generics / extends / implements up to the class body
    while not cur.done() and cur.peek().text != "{":
        cur.next()
    if cur.done():
        return
    cur.next()  # consume '{'
    if kw.text == "enum":
        _skip_enum_constants(cur)
    stack = outer + [cls]
    while not cur.done():
        tok = cur.peek()
        if tok.text == "}":
            cur.next()
            return
        if tok.text == ";":
            cur.next()
            continue
        if tok.text == "@":
            _skip_annotation(cur)
            continue
        if tok.kind == "keyword" and tok.text in ("class", "interface", "enum"):
            _parse_java_class(file, text, cur, stack, records)
            continue
        _parse_java_member(file, text, cur, stack, records)


def _parse_java_member(
    file: SourceFile,
    text: str,
    cur: _Cursor,
    stack: list[_JavaClass],
    records: list[ApiRecord],
) -> None:
    """One class-body member: method, constructor, field, or initializer block."""
    head: list[LexToken] = []
    start_tok = cur.peek()
    while not cur.done():
        tok = cur.peek()
        if tok.text == "@":
            _skip_annotation(cur)
            continue
        if tok.kind == "keyword" and tok.text in ("class", "interface", "enum"):
            _parse_java_class(file, text, cur, stack, records)
            return
        if tok.text == "=":  # field with initializer
            _skip_statement(cur)
            return
        if tok.text == ";":  # bare field / abstract marker handled below
            cur.next()
            return
        if tok.text == "{":  # static or instance initializer block
            _skip_braces(cur)
            return
        if tok.text == "}":  # end of class body; let the caller consume it
            return
        if tok.text == "(":
            break
        if tok.text == "<":
            head.extend(_take_generics(cur))
            continue
        head.append(cur.next())
    if cur.done() or cur.peek().text != "(":
        return
    params_tokens = _take_parens(cur)
    # after the parameter list: throws clause, then '{' body or ';'
    body_end_offset: int | None = None
    while not cur.done():
        tok = cur.peek()
        if tok.text == "{":
            _skip_braces(cur)
            body_end_offset = cur.tokens[cur.i - 1].end_offset
            break
        if tok.text == ";":
            cur.next()
            break
        cur.next()
    if not head or head[-1].kind != "identifier":
        return
    name_tok = head[-1]
    modifiers = {t.text for t in head if t.kind == "keyword" and t.text in _JAVA_MODIFIERS}
    type_tokens = [
        t for t in head[:-1]
        if not (t.kind == "keyword" and t.text in _JAVA_MODIFIERS)
    ]
    type_tokens = _strip_leading_type_params(type_tokens)

    cls = stack[-1]
    is_ctor = name_tok.text == cls.name and not type_tokens
    if is_ctor:
        kind = JAVA_CONSTRUCTOR
        return_type = None
    elif len(stack) > 1:
        kind = JAVA_INNER_CLASS_METHOD
        return_type = _render_tokens(type_tokens) or None
    else:
        kind = JAVA_METHOD
        return_type = _render_tokens(type_tokens) or None

    signature = _render_java_signature(head, params_tokens)
    body_start = start_tok.offset if start_tok is not None else name_tok.offset
    body = text[body_start:body_end_offset] if body_end_offset is not None else signature

    records.append(
        ApiRecord(
            name=name_tok.text,
            signature=signature,
            class_name=cls.name,
            enclosing_class_decl=cls.decl_line,
            body=body,
            file=file.path,
            language=JAVA,
            kind=kind,
            is_static="static" in modifiers,
            param_names=tuple(_java_param_names(params_tokens)),
            return_type=return_type,
            outer_classes=tuple(c.name for c in stack[:-1]),
        )
    )


def _skip_annotation(cur: _Cursor) -> None:
    cur.next()  # '@'
    if not cur.done() and cur.peek().kind in ("identifier", "keyword"):
        cur.next()
        while not cur.done() and cur.peek().text == ".":
            cur.next()
            if not cur.done():
                cur.next()
    if not cur.done() and cur.peek().text == "(":
        _take_parens(cur)


def _skip_statement(cur: _Cursor) -> None:
    """Skip to the ';' closing the current statement, honoring nesting."""
    depth = 0
    while not cur.done():
        t = cur.next().text
        if t in "([{":
            depth += 1
        elif t in ")]}":
            depth -= 1
        elif t == ";" and depth <= 0:
            return


def _skip_braces(cur: _Cursor) -> None:
    depth = 0
    while not cur.done():
        t = cur.next().text
        if t == "{":
            depth += 1
        elif t == "}":
            depth -= 1
            if depth == 0:
                return


def _skip_enum_constants(cur: _Cursor) -> None:
    """Skip enum constants (possibly with argument lists or bodies) up to ';'.

    An enum body without a trailing ';' holds only constants; in that case we
    stop right before the closing '}' so the caller sees the class end.
    """
    depth = 0
    while not cur.done():
        tok = cur.peek()
        if tok.text == "(":
            _take_parens(cur)
            continue
        if tok.text == "{":
            _skip_braces(cur)
            continue
        if tok.text == ";":
            cur.next()
            return
        if tok.text == "}":
            return
        cur.next()


def _take_parens(cur: _Cursor) -> list[LexToken]:
    """Consume a balanced (...) group and return the tokens inside it."""
    out: list[LexToken] = []
    if cur.done() or cur.peek().text != "(":
        return out
    depth = 0
    while not cur.done():
        tok = cur.next()
        if tok.text == "(":
            depth += 1
            if depth == 1:
                continue
        elif tok.text == ")":
            depth -= 1
            if depth == 0:
                return out
        out.append(tok)
    return out


def _take_generics(cur: _Cursor) -> list[LexToken]:
    """Consume a balanced <...> group, returning all tokens including brackets."""
    out: list[LexToken] = []
    depth = 0
    while not cur.done():
        tok = cur.next()
        out.append(tok)
        if tok.text == "<":
            depth += 1
        elif tok.text == ">":
            depth -= 1
            if depth == 0:
                return out
        elif tok.text == ">>":
            depth -= 2
            if depth <= 0:
                return out
    return out


def _strip_leading_type_params(tokens: list[LexToken]) -> list[LexToken]:
    """Drop a method-level type parameter group like ``<T>`` before the return type."""
    if tokens and tokens[0].text == "<":
        depth = 0
        for idx, tok in enumerate(tokens):
            if tok.text == "<":
                depth += 1
            elif tok.text == ">":
                depth -= 1
                if depth == 0:
                    return tokens[idx + 1 :]
            elif tok.text == ">>":
                depth -= 2
                if depth <= 0:
                    return tokens[idx + 1 :]
    return tokens


def _java_param_names(tokens: list[LexToken]) -> list[str]:
    names: list[str] = []
    for chunk in _split_top_level(tokens, ","):
        idents = [t for t in chunk if t.kind == "identifier"]
        if idents:
            names.append(idents[-1].text)
    return names


def _split_top_level(tokens: list[LexToken], sep: str) -> list[list[LexToken]]:
    chunks: list[list[LexToken]] = []
    current: list[LexToken] = []
    depth = 0
    for tok in tokens:
        if tok.text in "([{<":
            depth += 1
        elif tok.text in ")]}>":
            depth -= 1
        elif tok.text == sep and depth == 0:
            chunks.append(current)
            current = []
            continue
        current.append(tok)
    if current:
        chunks.append(current)
    return chunks


_NO_SPACE_BEFORE = {",", ")", "]", ";", ".", "(", "<", ">", ">>", "[", "..."}
_NO_SPACE_AFTER = {"(", "[", ".", "<"}


def _render_tokens(tokens: list[LexToken]) -> str:
    parts: list[str] = []
    prev: LexToken | None = None
    for tok in tokens:
        no_space = tok.text in _NO_SPACE_BEFORE or (prev and prev.text in _NO_SPACE_AFTER)
        # '<' binds to a preceding type name (List<K>) but not to keywords (public <T>)
        if tok.text == "<" and prev is not None and prev.kind != "identifier":
            no_space = False
        if parts and not no_space:
            parts.append(" ")
        parts.append(tok.text)
        prev = tok
    return "".join(parts)


def _render_java_signature(head: list[LexToken], params: list[LexToken]) -> str:
    rendered_head = _render_tokens(head)
    rendered_params = _render_tokens(params)
    return f"{rendered_head}({rendered_params})"


def java_base_type_name(type_text: str) -> str:
    """Base identifier of a Java type, e.g. ``java.util.List<K>`` -> ``List``."""
    base = type_text.split("<", 1)[0]
    idents = [t.text for t in lex(base, JAVA) if t.kind == "identifier"]
    return idents[-1] if idents else type_text


def is_complex_java_type(type_text: str | None) -> bool:
    """True for return types outside the primitive/void/String set."""
    if type_text is None:
        return False
    return type_text not in JAVA_PRIMITIVE_TYPES
