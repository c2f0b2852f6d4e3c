"""
MIT License

Copyright (c) 2025-present The qkd-efficiency Authors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE.
"""

from __future__ import annotations

import importlib
import inspect
from typing import TYPE_CHECKING, Any, ClassVar, NamedTuple

from docutils import nodes
from sphinx import addnodes
from sphinx.application import Sphinx
from sphinx.environment import BuildEnvironment
from sphinx.locale import _
from sphinx.util.docutils import SphinxDirective

if TYPE_CHECKING:
    from sphinx.writers.html5 import HTML5Translator


class attributetable(nodes.General, nodes.Element):
    pass


class attributetableplaceholder(nodes.General, nodes.Element):
    pass


class TableEntry(NamedTuple):
    target: str
    label: str
    kind: str


def visit_attributetable_node(self: HTML5Translator, node: attributetable) -> None:
    self.body.append(f'<div class="py-attribute-table" data-move-to-id="{node["python-class"]}">')


def depart_attributetable_node(self: HTML5Translator, node: attributetable) -> None:
    self.body.append('</div>')


class PyAttributeTable(SphinxDirective):
    """``.. attributetable:: qkd_efficiency.LinkPoint`` renders a summary of a class's members.

    The table is filled in once every object of the build is known, so the directive only
    leaves a placeholder behind.
    """

    has_content = False
    required_arguments = 1
    option_spec: ClassVar[dict[str, Any]] = {}

    def run(self) -> list[nodes.Node]:
        modulename, _, classname = self.arguments[0].strip().rpartition('.')
        if not modulename:
            modulename = self.env.ref_context.get('py:module') or self.env.temp_data.get('autodoc:module', '')
        node = attributetableplaceholder('')
        node['python-module'] = modulename
        node['python-class'] = classname
        return [node]


def _members(env: BuildEnvironment) -> dict[str, list[str]]:
    members: dict[str, list[str]] = {}
    for fullname, _, objtype, _, _, _ in env.domains['py'].get_objects():
        if objtype in ('module', 'class', 'exception', 'data'):
            continue
        owner, _, child = fullname.rpartition('.')
        members.setdefault(owner, []).append(child)
    return members


def _classify(cls: type, name: str) -> str:
    for base in cls.__mro__:
        if name in base.__dict__:
            value = base.__dict__[name]
            break
    else:
        return 'attribute'

    if isinstance(value, classmethod):
        return 'classmethod'
    if isinstance(value, staticmethod):
        return 'staticmethod'
    if inspect.isfunction(value):
        return 'method'
    return 'attribute'


def _column(title: str, entries: list[TableEntry]) -> nodes.Node:
    items = nodes.bullet_list('')
    for entry in sorted(entries, key=lambda e: e.label):
        ref = nodes.reference('', '', nodes.Text(entry.label), internal=True, refuri=f'#{entry.target}')
        item = nodes.list_item('', addnodes.compact_paragraph('', '', ref))
        if entry.kind != 'attribute':
            item['classes'].append(f'py-attribute-table-{entry.kind}')
        items.append(item)
    column = nodes.container('', nodes.strong(title, title), items)
    column['classes'].append('py-attribute-table-column')
    return column


def process_attributetable(app: Sphinx, doctree: nodes.Node, docname: str) -> None:
    members = _members(app.builder.env)
    for node in list(doctree.findall(attributetableplaceholder)):
        modulename, classname = node['python-module'], node['python-class']
        fullname = f'{modulename}.{classname}'
        cls = getattr(importlib.import_module(modulename), classname)

        attributes: list[TableEntry] = []
        methods: list[TableEntry] = []
        for name in members.get(fullname, []):
            kind = _classify(cls, name)
            entry = TableEntry(f'{fullname}.{name}', name, kind)
            (attributes if kind == 'attribute' else methods).append(entry)

        if not (attributes or methods):
            node.replace_self([])
            continue

        table = attributetable('')
        table['python-class'] = fullname
        if attributes:
            table.append(_column(_('Attributes'), attributes))
        if methods:
            table.append(_column(_('Methods'), methods))
        node.replace_self([table])


def setup(app: Sphinx) -> dict[str, Any]:
    app.add_directive('attributetable', PyAttributeTable)
    app.add_node(attributetable, html=(visit_attributetable_node, depart_attributetable_node))
    app.add_node(attributetableplaceholder)
    app.connect('doctree-resolved', process_attributetable)
    return {'parallel_read_safe': True}
