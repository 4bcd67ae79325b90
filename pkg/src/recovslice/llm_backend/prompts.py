"""Prompt templates for the three estimator questions.

The wording, spacing, and even the typos of these templates are part of the
system's tested surface: prompts are cached by content hash, and the tests
pin the exact bytes produced for reference inputs.  Do not "fix" the text.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

__all__ = ["PromptExample", "STATIC_RECOVERY_EXAMPLE",
           "build_recovery_prompt", "build_alias_prompt",
           "build_definition_prompt"]


@dataclass(frozen=True)
class PromptExample:
    """A worked recovery example: the inputs shown and the expected output."""

    value: str
    type_name: str
    structures: tuple[str, ...]
    path: Optional[str]
    output: str  # the expected-output JSON text, without code fences


_RECOVERY_BACKGROUND = """\
# Background
When executing Java code involving libraries, understanding the internal structure of objects is critical for debugging. Given the "toString" value of a value, your task is to **analyze a Java object** and **generate a expanded JSON representation of internal values** that captures its internal fields relevant to debugging.

During generated JSON representation, you will be given a focal vairable path, e.g. `list.elementData[0].name`, and for objects fields, you should focus on the focal variables and their values, and you can omit the rest fields. But DO NOTICE that, the output should be a JSON object, strictly following the JSON grammar, to omit a field in a JSON object, DO NOT use "...", but just delete the field to keep the JSON valid. For list or array, DO NOT omit any element in LIST. If the focal variable is "#all_fields#", you should ignore the focal variable and return a complete JSON object with the all fields.

The expanded JSON representation should:

- Strictly follow the format `"var_name|var_type": var_value`.
- Reflect inferred values and types for all fields used or affected in the operation.
- Be rooted at the top-level variable (e.g., `set`).
- Wrap your output within a json code block (i.e., ```json ... ```). Do not include any comments inside the json code block.
- If needed, use <thought>xxxx</thought> tags to express your thought process first. The thoughts should be as short as possible.
- If the focal variable contains a deep recursive structure (e.g., a tree or a linked list), you should only expand the first level of the structure. For example, if the focal variable is a tree, you should only expand the root node and its immediate children, but not the entire tree.
"""

STATIC_RECOVERY_EXAMPLE = PromptExample(
    value="{pair={}, }",
    type_name="java.util.concurrent.atomic.AtomicStampedReference",
    structures=(
        "java.util.concurrent.atomic.AtomicStampedReference:"
        "{java.util.concurrent.atomic.AtomicStampedReference$Pair pair;}",
    ),
    path="atomicRef.pair.reference",
    output="""\
{
  "atomicRef": {
    "pair|java.util.concurrent.atomic.AtomicStampedReference$Pair": {
      "stamp|int": "1",
      "reference|java.lang.Integer": "42"
    },
    "UNSAFE|sun.misc.Unsafe": "{}",
    "pairOffset|long": "12"
  }
}""",
)


def _structure_bullets(structures: Sequence[str]) -> str:
    return "\n".join(f"- `{s}`" for s in structures)


def build_recovery_prompt(*, name: str, type_name: str, value: str, path: str,
                          structures: Sequence[str], code: str,
                          example: PromptExample = STATIC_RECOVERY_EXAMPLE) -> str:
    """Prompt asking for the expanded object graph of one variable."""
    example_path = example.path if example.path is not None else "#all_fields#"
    return (
        _RECOVERY_BACKGROUND
        + "\n# Example\n\n"
        + "**Focal Variable toString Value:**\n"
        + f"`{example.value}`\n\n"
        + "**Focal Variable Type Name:**\n"
        + f"`{example.type_name}`\n\n"
        + "**Related Class Structures:**\n"
        + _structure_bullets(example.structures) + "\n\n\n"
        + "**Focal Variable Path:**\n"
        + f"`{example_path}`\n\n"
        + "**Expected Output:**\n"
        + "```json\n" + example.output + "\n```\n\n"
        + "## Task\n\n"
        + "**Focal Variable Name:**\n"
        + f"`{name}`\n\n"
        + "**Focal Variable Type Name:**\n"
        + f"`{type_name}`\n\n"
        + "**Focal Variable toString Value:**\n"
        + f"`{value}`\n\n"
        + "**Focal Variable Path:**\n"
        + f"`{path}`\n\n"
        + "**Related Class Structures:**\n"
        + _structure_bullets(structures) + "\n\n\n"
        + "**Line of Code Containing the Variable:**\n"
        + "```java\n" + code + "\n```\n\n"
        + "**Output:**\n"
    )


_ALIAS_BACKGROUND = """\
<Background>
You are a Java expert, you need to analyze the alias relationships through static analysis. Given a variable and a method call, your task is to identify any alias relationship between (*Set 1*) the listed fields of the given variable and (*Set 2*) the variables involved in the method call and the return value of the method call.

<Example>
Given code:
```list.add(item);```

Given the source code of function calls in the code:
public boolean add(E e) {
modCount++;
add(e, elementData, size);
return true;
}

Variables involved in the line of code:
`list` is of type `java.util.ArrayList`,
`item` is of type `Integer`,

We know that another variable not in the code, `list`, with the following structure:
{"list:java.util.ArrayList":{"elementData:java.lang.Object[]":"[]","size:int":"0"}}

We are interested in the fields `list.elementData.elementData[0]`

Your response should be:
{
"list.elementData.elementData[0]":"item"
}

<Question>
"""


def _fields_json(fields: Mapping[str, str]) -> str:
    return "{" + "".join(f'"{name}":"{type_name}",'
                         for name, type_name in fields.items()) + "}"


def build_alias_prompt(*, code: str, callee_sources: Sequence[str],
                       variables: Sequence[tuple[str, str]],
                       variable_fields: Sequence[tuple[str, Mapping[str, str]]],
                       root_name: str, graph_json: str,
                       known_aliases: Sequence[str],
                       fields_of_interest: Sequence[str]) -> str:
    """Prompt asking which expressions at a step alias the root's fields."""
    parts = [
        _ALIAS_BACKGROUND,
        "Given code:\n",
        f"```{code}```\n\n",
        "Given the source code of function calls in the code:\n",
        "\n".join(callee_sources) + "\n\n",
        "Variables involved in the line of code:\n",
        "".join(f"`{n}` is of type `{t}`,\n" for n, t in variables) + "\n",
    ]
    for name, fields in variable_fields:
        if fields:
            parts.append(f"`{name}` has the following fields: "
                         f"{_fields_json(fields)},\n")
        else:
            parts.append(f"`{name}` has the following fields:\n")
    parts.append(
        "\nIf a variable has name of format `<TYPE>_instance`, it refers to"
        " the instance created by calling the constructor of `<TYPE>`.\n"
        "If a variable has name of format `return_of_<method_signature>`,"
        " it refers to the variable returned by a method call of"
        " `<method_signature>`.\n\n")
    parts.append(f"We know that another variable not in the code, "
                 f"`{root_name}`, with the following structure:\n")
    parts.append(graph_json + "\n")
    if known_aliases:
        parts.append("where\n")
        parts.append("".join(
            f"this `{root_name}` has the same memory address as `{alias}`"
            " in the line of code,\n" for alias in known_aliases))
    parts.append("\nWe are interested in the fields of this instance: "
                 + "".join(f"`{f}`," for f in fields_of_interest) + "\n\n")
    parts.append(f"From the given code, identify all the aliases of this"
                 f" `{root_name}` and the fields in this `{root_name}`.\n\n")
    parts.append(
        "In your response, strictly follow the JSON format. The JSON keys"
        " are from the listed fields, JSON values are variables or their"
        " fields that are the corresponding aliases of the fields."
        " Do not include explanation.\n")
    return "".join(parts)


_DEFINITION_HEADER = """\
# definition_inference

## Definition Inference Task

You are a Java expert responsible for analyzing variable assignments. 

### Instructions:
1. You will receive a **target line of code**.
2. You will also be given a **variable name** and the **line of code** where this variable is used.
3. Your objective is to determine whether the target line writes to the specified variable.

### Response Format:
Please provide a clear answer based on your analysis:
- **Answer: <T>** (True) if the target line writes to the variable.
- **Answer: <F>** (False) if it does not.

### Examples:

**Example 1:**
- **h** is an `ArrayList`
- **Target Line:** `h.set(10, "abc");`
- **Variable:** `h.elementData[8]`
- **Usage Line:** `int x = h.get(8);`

**Example Answer 1:**
- **Answer:** <F>  
The result is false because the target line sets the 10th element rather than the 8th element.

---

**Example 2:**
- **d** is a `HashMap`
- **Target Line:** `d.put("ccc", "xyz");`
- **Variable:** `d.table["ccc"]`
- **Usage Line:** `Object r = d.get("ccc");`

**Example Answer 2:**
- **Answer:** <T>  
The result is true because the target line sets the value for the key "ccc" in the hashmap.

---

### Your Turn:
Now, please analyze the following input according to the provided format.
In your response, return <T> for true and <F> for false.

### Question:
"""


def build_definition_prompt(*, target_code: str, callee_sources: Sequence[str],
                            variables: Sequence[tuple[str, str, str]],
                            root_name: str, graph_json: str, usage_code: str,
                            field_path: str) -> str:
    """Prompt asking whether the target step writes the queried field."""
    triplets = "\n".join(
        f"Variable: \n`{name}`\nVariable Type: \n`{type_name}`\n"
        f"Runtime Value: \n`{value}`"
        for name, type_name, value in variables)
    return (
        _DEFINITION_HEADER
        + "**Target Line:**\n"
        + f"`{target_code}`\n\n"
        + "**Function Calls in Source Code:**\n"
        + "\n".join(callee_sources) + "\n\n"
        + "**Variables Involved:**\n\n"
        + triplets + "\n\n\n"
        + f"We know that `{root_name}` has the following structure and value:\n"
        + graph_json + "\n"
        + "But we don't know which step during the execution modified the value.\n\n"
        + "**Usage Line:**\n"
        + f"`{usage_code}`\n\n"
        + f"`{root_name}` has a field `{field_path}`, does the code "
        + f"`{target_code}` directly or indirectly write field `{field_path}`?\n"
        + "In your response, strictly return <T> for true and <F> for false."
        + " Briefly explain your answer.\n"
    )
