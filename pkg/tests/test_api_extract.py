import logging

from apirag.api_extract import (
    CLASS_FUNCTION,
    CONSTRUCTOR,
    JAVA_CONSTRUCTOR,
    JAVA_INNER_CLASS_METHOD,
    JAVA_METHOD,
    REGULAR_FUNCTION,
    extract_apis,
    internal_filter,
)
from apirag.corpus import scan_repo, source_file_from_text


def extract_from(path, src):
    return extract_apis(source_file_from_text(path, src))


def test_module_level_function():
    records = extract_from("io_utils.py", "def load_data(path, fmt):\n    return path\n")
    assert len(records) == 1
    r = records[0]
    assert r.kind == REGULAR_FUNCTION
    assert r.class_name is None
    assert r.param_names == ("path", "fmt")
    assert r.signature == "def load_data(path, fmt)"
    assert "return path" in r.body


def test_constructor_excludes_self():
    src = "class Trainer:\n    def __init__(self, opts):\n        self.opts = opts\n"
    records = extract_from("trainer.py", src)
    r = records[0]
    assert r.kind == CONSTRUCTOR
    assert r.class_name == "Trainer"
    assert r.param_names == ("opts",)
    assert r.enclosing_class_decl == "class Trainer:"


def test_static_and_classmethod_decorators():
    src = (
        "class C:\n"
        "    @staticmethod\n"
        "    def s(a):\n"
        "        return a\n"
        "    @classmethod\n"
        "    def c(cls, b):\n"
        "        return b\n"
        "    @property\n"
        "    def p(self):\n"
        "        return 1\n"
    )
    by_name = {r.name: r for r in extract_from("c.py", src)}
    assert by_name["s"].is_static and by_name["s"].param_names == ("a",)
    assert by_name["c"].is_static and by_name["c"].param_names == ("b",)
    assert by_name["p"].kind == CLASS_FUNCTION and not by_name["p"].is_static


def test_nested_class_methods_included_nested_functions_excluded():
    src = (
        "class Outer:\n"
        "    class Inner:\n"
        "        def compute(self, x):\n"
        "            def helper(y):\n"
        "                return y\n"
        "            return helper(x)\n"
        "\n"
        "lam = lambda v: v\n"
    )
    records = extract_from("outer.py", src)
    assert [r.name for r in records] == ["compute"]
    r = records[0]
    assert r.class_name == "Inner"
    assert r.outer_classes == ("Outer",)


def test_defs_under_module_level_guards_are_kept():
    src = (
        "try:\n"
        "    import fastpath\n"
        "    def speedy(x):\n"
        "        return fastpath.run(x)\n"
        "except ImportError:\n"
        "    def speedy(x):\n"
        "        return x\n"
        "\n"
        "if True:\n"
        "    class Guarded:\n"
        "        def method(self):\n"
        "            return 1\n"
    )
    records = extract_from("guards.py", src)
    assert [r.name for r in records] == ["speedy", "speedy", "method"]
    assert records[2].class_name == "Guarded"


def test_async_and_annotations():
    src = "async def fetch(url: str, timeout: float = 1.0) -> bytes:\n    return b''\n"
    r = extract_from("net.py", src)[0]
    assert r.signature == "async def fetch(url: str, timeout: float=1.0) -> bytes"
    assert r.return_type == "bytes"
    assert r.param_names == ("url", "timeout")


def test_python_completeness_count(py_repo):
    files = scan_repo(py_repo)
    count = sum(len(extract_apis(f)) for f in files)
    # hand count: io_utils has 2, trainer has 3, app has 1
    assert count == 6


def test_every_record_locates_its_definition(py_repo):
    files = {f.path: f for f in scan_repo(py_repo)}
    for f in files.values():
        for r in extract_apis(f):
            header_lines = [line for line in files[r.file].lines if r.name in line]
            assert header_lines, f"{r.name} not found in {r.file}"


def test_parse_failed_yields_empty(caplog):
    bad = source_file_from_text("bad.py", "def broken(:\n")
    with caplog.at_level(logging.WARNING):
        assert extract_apis(bad) == []
    assert "bad.py" in caplog.text


JAVA_SRC = """\
package com.acme;

public class RingBuffer {
    private int capacity = initCapacity();
    private static final int LIMIT = 64;

    public RingBuffer(int capacity) {
        this.capacity = capacity;
    }

    public int size() {
        return capacity;
    }

    public int size(int scale) {
        return capacity * scale;
    }

    public static java.util.List<String> names(int count) {
        return null;
    }

    private int initCapacity() {
        return 8;
    }

    public class Cursor {
        public int advance(int steps) {
            return steps;
        }
    }
}

interface Sink {
    void accept(String item);
}
"""


def test_java_extraction():
    records = extract_from("com/acme/RingBuffer.java", JAVA_SRC)
    by_sig = {r.signature: r for r in records}

    ctor = by_sig["public RingBuffer(int capacity)"]
    assert ctor.kind == JAVA_CONSTRUCTOR
    assert ctor.return_type is None
    assert ctor.param_names == ("capacity",)

    size = by_sig["public int size()"]
    assert size.kind == JAVA_METHOD
    assert size.class_name == "RingBuffer"
    assert not size.is_static
    assert size.return_type == "int"

    # overloads give one record each
    assert "public int size(int scale)" in by_sig

    names = by_sig["public static java.util.List<String> names(int count)"]
    assert names.is_static
    assert names.return_type == "java.util.List<String>"

    inner = by_sig["public int advance(int steps)"]
    assert inner.kind == JAVA_INNER_CLASS_METHOD
    assert inner.class_name == "Cursor"
    assert inner.outer_classes == ("RingBuffer",)

    accept = by_sig["void accept(String item)"]
    assert accept.class_name == "Sink"
    assert accept.param_names == ("item",)

    # fields never become records
    assert all(r.name not in ("capacity", "LIMIT") for r in records)


def test_java_generic_method_and_varargs():
    src = (
        "class Util {\n"
        "    public <T> T first(java.util.List<T> items, String... tags) {\n"
        "        return null;\n"
        "    }\n"
        "}\n"
    )
    r = extract_from("Util.java", src)[0]
    assert r.return_type == "T"
    assert r.param_names == ("items", "tags")


def test_java_enum_members():
    src = (
        "enum Mode {\n"
        "    FAST, SLOW;\n"
        "    public int weight() {\n"
        "        return 1;\n"
        "    }\n"
        "}\n"
    )
    records = extract_from("Mode.java", src)
    assert [r.name for r in records] == ["weight"]


def test_internal_filter():
    records = extract_from("inside.py", "def f(a):\n    return a\n")
    vendored = extract_from("vendor/out.py", "def g(b):\n    return b\n")
    kept = internal_filter(records + vendored, {"inside.py"})
    assert [r.name for r in kept] == ["f"]
    assert internal_filter([], {"inside.py"}) == []
