#!/usr/bin/env python3
"""Generate a C++ source embedding the prompt template files.

Each templates/<id>@<version>.(txt|json) file becomes one registry entry.
String literals are emitted with octal escapes so arbitrary bytes survive.
"""
import sys
from pathlib import Path


def c_escape(data: bytes) -> str:
    out = []
    for b in data:
        c = chr(b)
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n\"\n    \"")
        elif 32 <= b < 127:
            out.append(c)
        else:
            out.append("\\%03o" % b)
    return "".join(out)


def main() -> int:
    if len(sys.argv) != 3:
        print("usage: embed_templates.py <templates_dir> <out_cpp>", file=sys.stderr)
        return 2
    tdir = Path(sys.argv[1])
    out_path = Path(sys.argv[2])
    entries = []
    for path in sorted(tdir.iterdir()):
        if not path.is_file() or "@" not in path.name:
            continue
        stem = path.name
        for suffix in (".txt", ".json"):
            if stem.endswith(suffix):
                stem = stem[: -len(suffix)]
                break
        tid, version = stem.rsplit("@", 1)
        entries.append((tid, version, path.read_bytes()))

    lines = [
        "// Generated by tools/embed_templates.py; do not edit.",
        '#include "tabench/prompt_templates.hpp"',
        "",
        "namespace tabench::detail {",
        "",
        "extern const EmbeddedTemplate kEmbeddedTemplates[] = {",
    ]
    for tid, version, data in entries:
        lines.append('    {"%s", "%s",' % (tid, version))
        lines.append('    "%s"},' % c_escape(data))
    lines.append("};")
    lines.append("")
    lines.append("extern const size_t kEmbeddedTemplateCount = sizeof(kEmbeddedTemplates) / sizeof(kEmbeddedTemplates[0]);")
    lines.append("")
    lines.append("} // namespace tabench::detail")
    lines.append("")
    out_path.write_text("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
