import json

import pytest

from apirag.bench import load_taskset
from apirag.config import RunConfig
from apirag.corpus import CorpusIndex, scan_repo
from apirag.kb import build_kb
from apirag.mocksuite import build_suite
from apirag.pipeline import ProviderBundle
from apirag.providers import HashEmbedder, MockCompletion, ScriptedSummarizer

PY_MAIN = """\
import os
from utils.io_utils import load_data, save_data

def main():
    cfg = {}
    data = load_data('x.csv', 'csv')
    print(data)
    result = load_data('y.csv', 'csv')
    save_data(result, 'out.bin')
"""

PY_IO_UTILS = """\
def load_data(path, fmt):
    return path, fmt

def save_data(obj, path):
    return None
"""

PY_TRAINER = """\
class Trainer:
    def __init__(self, opts):
        self.opts = opts

    def fit(self, data, epochs):
        return len(data) * epochs

    @staticmethod
    def defaults():
        return {}
"""


@pytest.fixture
def py_repo(tmp_path):
    """Small Python repository with cross-file imports."""
    root = tmp_path / "pyrepo"
    (root / "utils").mkdir(parents=True)
    (root / "utils" / "__init__.py").write_text("", encoding="utf-8")
    (root / "utils" / "io_utils.py").write_text(PY_IO_UTILS, encoding="utf-8")
    (root / "core").mkdir()
    (root / "core" / "trainer.py").write_text(PY_TRAINER, encoding="utf-8")
    (root / "app.py").write_text(PY_MAIN, encoding="utf-8")
    (root / "README.md").write_text("# fixture\n", encoding="utf-8")
    return root


JAVA_RING_BUFFER = """\
package com.acme;

public class RingBuffer {
    private int capacity;

    public RingBuffer(int capacity) {
        this.capacity = capacity;
    }

    public int size() {
        return capacity;
    }

    public static RingBuffer empty() {
        return new RingBuffer(0);
    }
}
"""

JAVA_WIDGET = """\
package com.acme;

public class Widget {
    public Widget(int id) {
        this.id = id;
    }

    private int id;
}
"""

JAVA_MAIN = """\
package com.acme.app;

import com.acme.Widget;
import com.acme.RingBuffer;

public class Main {
    public static void main(String[] args) {
        Widget widget = new Widget(3);
        RingBuffer buffer = RingBuffer.empty();
        System.out.println(buffer.size());
    }
}
"""


@pytest.fixture
def java_repo(tmp_path):
    root = tmp_path / "javarepo"
    pkg = root / "src" / "com" / "acme"
    pkg.mkdir(parents=True)
    (pkg / "RingBuffer.java").write_text(JAVA_RING_BUFFER, encoding="utf-8")
    (pkg / "Widget.java").write_text(JAVA_WIDGET, encoding="utf-8")
    app = root / "src" / "com" / "acme" / "app"
    app.mkdir()
    (app / "Main.java").write_text(JAVA_MAIN, encoding="utf-8")
    return root


class MockSuite:
    """The deterministic 40-task suite plus everything needed to run it."""

    def __init__(self, root):
        self.paths = build_suite(root)
        self.files = scan_repo(self.paths.repo_dir)
        self.embedder = HashEmbedder(256)
        self.summarizer = ScriptedSummarizer(
            json.loads(self.paths.summaries_path.read_text(encoding="utf-8"))
        )
        self.oracle = json.loads(self.paths.oracle_path.read_text(encoding="utf-8"))["tasks"]
        self.llm = MockCompletion(self.oracle)
        self.providers = ProviderBundle(self.embedder, self.summarizer, self.llm)
        self.kb = build_kb(self.files, self.embedder, self.summarizer)
        self.taskset = load_taskset(self.paths.tasks_path)
        self.cfg = RunConfig(repo_root=str(self.paths.repo_dir))
        self.corpus_index = CorpusIndex.build(
            self.files, self.cfg.window_len, self.cfg.slide
        )


@pytest.fixture(scope="session")
def mock_suite(tmp_path_factory):
    return MockSuite(tmp_path_factory.mktemp("mocksuite"))
