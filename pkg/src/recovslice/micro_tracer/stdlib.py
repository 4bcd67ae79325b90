"""Bundled MiniLang container library and interpreter builtins.

The containers (List, Map, StrBuf) are ordinary MiniLang source files merged
into every traced program, so their internals can either be traced like
application code or hidden behind a partial-trace partition.  Only `Array` is
native: a growable indexable sequence the containers build on.

A program that defines any function of a bundled type (say `List.get`)
replaces that whole library file with its own definitions.
"""

from __future__ import annotations

__all__ = ["BUILTIN_NAMES", "CLASS_STRUCTURES", "LIB_FILES"]

# Builtins are opaque: calling one makes the statement a call site with no
# callee source, in full traces as well as partial ones.
BUILTIN_NAMES = frozenset({"rand", "print", "str", "strlen", "strget"})

# Field layout summaries in the shape prompts expect: "Type:{t f; t f;}".
CLASS_STRUCTURES = {
    "List": "List:{Array elementData; int size;}",
    "Map": "Map:{Array keys; Array vals; int size;}",
    "StrBuf": "StrBuf:{Array value; int length;}",
}

_LIST_SOURCE = """\
fn List.init(self) {
  self.elementData = new Array();
  self.size = 0;
}

fn List.add(self, item) {
  self.elementData[self.size] = item;
  self.size = self.size + 1;
}

fn List.get(self, index) {
  return self.elementData[index];
}

fn List.set(self, index, item) {
  self.elementData[index] = item;
}

fn List.removeLast(self) {
  self.size = self.size - 1;
  var gone = self.elementData[self.size];
  self.elementData[self.size] = null;
  return gone;
}

fn List.size(self) {
  return self.size;
}
"""

_MAP_SOURCE = """\
fn Map.init(self) {
  self.keys = new Array();
  self.vals = new Array();
  self.size = 0;
}

fn Map.indexOf(self, key) {
  var i = 0;
  while (i < self.size) {
    if (self.keys[i] == key) {
      return i;
    }
    i = i + 1;
  }
  return -1;
}

fn Map.put(self, key, value) {
  var idx = self.indexOf(key);
  if (idx < 0) {
    self.keys[self.size] = key;
    self.vals[self.size] = value;
    self.size = self.size + 1;
  } else {
    self.vals[idx] = value;
  }
}

fn Map.get(self, key) {
  var idx = self.indexOf(key);
  if (idx < 0) {
    return null;
  }
  return self.vals[idx];
}

fn Map.has(self, key) {
  return self.indexOf(key) >= 0;
}

fn Map.remove(self, key) {
  var idx = self.indexOf(key);
  if (idx < 0) {
    return null;
  }
  var gone = self.vals[idx];
  var last = self.size - 1;
  self.keys[idx] = self.keys[last];
  self.vals[idx] = self.vals[last];
  self.keys[last] = null;
  self.vals[last] = null;
  self.size = last;
  return gone;
}

fn Map.size(self) {
  return self.size;
}
"""

_STRBUF_SOURCE = """\
fn StrBuf.init(self, text) {
  self.value = new Array();
  self.length = 0;
  self.append(text);
}

fn StrBuf.append(self, text) {
  var i = 0;
  var n = strlen(text);
  while (i < n) {
    self.value[self.length] = strget(text, i);
    self.length = self.length + 1;
    i = i + 1;
  }
  return self;
}

fn StrBuf.charAt(self, index) {
  return self.value[index];
}

fn StrBuf.toString(self) {
  var out = "";
  var i = 0;
  while (i < self.length) {
    out = out + self.value[i];
    i = i + 1;
  }
  return out;
}

fn StrBuf.size(self) {
  return self.length;
}
"""

LIB_FILES = {
    "lib/list.mini": _LIST_SOURCE,
    "lib/map.mini": _MAP_SOURCE,
    "lib/strbuf.mini": _STRBUF_SOURCE,
}
