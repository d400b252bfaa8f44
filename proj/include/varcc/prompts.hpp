// Copyright 2026 The varcc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "varcc/util.hpp"

namespace varcc::modelgw {

enum class PromptKind { FullCode, Diff };

inline const char* to_string(PromptKind k) {
  return k == PromptKind::FullCode ? "fullcode" : "diff";
}

// The two instruction templates are stored verbatim; build_prompt only
// substitutes the payload at the single {{CODE}} / {{DIFF}} slot.

inline constexpr std::string_view kFullCodeTemplate =
    R"(You are an expert C engineer specialized in configurable systems (C code with #if/#ifdef feature flags).

LANGUAGE STANDARD
Assume the code must be valid according to the ISO C99 standard.
Use C99 rules for syntax, declarations, and semantics when reasoning about compilation errors.

INPUT
You will receive a single C source file written in C (ISO C99). The code is provided below.

<code>
{{CODE}}
</code>

TASK
1) Consider the software product line induced by the feature macros used in the file. A "product" is any assignment of those macros to enabled/disabled (on/off).
2) Determine whether there exists at least one product configuration for which the code does NOT compile under a standard C99 compiler (e.g., gcc or clang with -std=c99).
3) If at least one product fails to compile:
- Identify the failing products as boolean assignments over macros (e.g., ENABLE_PAM=1,ENABLE_AUTH_MD5=0).
- List only products that fail. If there are many, list the minimal set of distinct failing products you can confidently justify from the code.
4) Provide a corrected version of the C code that compiles for ALL products under C99, by fixing the code itself.
- You MUST NOT rely on external build flags, compiler options, or macro redefinitions (-D/-U).
- You MUST NOT remove variability or delete features unless absolutely necessary.
- Prefer localized fixes: align declarations and uses under the same conditions, add missing declarations, introduce safe defaults, refactor conditional code, etc.
- Preserve the intended behavior as much as possible.

OUTPUT FORMAT (MANDATORY — JSON ONLY)
Return a single valid JSON object with exactly the following keys:
"result": "<semicolon-separated list of failing products, or empty string if none>",
"explanation": "<short explanation of the compilation issue(s), or a brief statement that no failing products exist>",
"fixed_code": "<full corrected C source code (C99-compliant), or empty string if you cannot confidently fix it>"

CONSTRAINTS
- If no failing products exist, set "result" to an empty string ("").
- If you cannot confidently produce a correct fix, set "fixed_code" to an empty string ("").
- Do NOT include markdown, comments outside the JSON, or any additional keys.
- The output must be strictly valid JSON and directly machine-readable.
)";

inline constexpr std::string_view kDiffTemplate =
    R"(You are an expert C engineer specialized in configurable systems (C code with #if/#ifdef feature flags).

LANGUAGE STANDARD
Assume the code must be valid according to the ISO C99 standard.
Use C99 rules for syntax, declarations, and semantics when reasoning about compilation errors.

INPUT
You will receive a single unified diff of a commit. The diff may contain one or more C source files (and possibly other files). Treat the diff as plain text.

<diff>
{{DIFF}}
</diff>

TASK
1. Identify which C source files are modified by the diff (e.g., *.c, *.h). Ignore non-C files for compilation analysis.
2. For EACH modified C file, analyze the post-commit code paths that are visible in the diff:
* Use added lines (+) and context lines as the primary source of information.
* Removed lines (-) indicate code that no longer exists and should not be considered part of the post-commit version.
* If the diff does not provide enough context to fully reconstruct a file, analyze only what can be confidently inferred from the visible hunks.
3. For each analyzed C file, consider the software product line induced by the feature macros used in that file. A "product" is any assignment of those macros to enabled/disabled (on/off).
4. Determine whether there exists at least one product configuration for which the post-commit code does NOT compile under a standard C99 compiler (e.g., gcc or clang with -std=c99).
* Focus only on compilation errors that can be justified from the code and preprocessor conditions visible in the diff (e.g., missing struct/type definitions, inconsistent declarations, undeclared identifiers, incompatible conditional blocks, etc.).
5. If at least one product fails to compile:
* Identify the failing products as boolean assignments over macros (e.g., ENABLE_PAM=1,ENABLE_AUTH_MD5=0).
* List only products that fail. If there are many, list the minimal set of distinct failing products you can confidently justify.
6. Instead of providing full corrected source code, describe how to fix the compilation problem(s):
* Explain what must be changed in the code to ensure that ALL products compile under C99.
* You MUST NOT rely on external build flags, compiler options, or macro redefinitions (-D/-U).
* You MUST NOT introduce #define or #undef directives.
* You MUST NOT remove variability or delete features unless absolutely necessary.
* Prefer localized fixes, such as aligning declarations and uses under the same conditions, adding missing forward declarations, guarding uses with appropriate #if conditions, or restructuring conditional code.
* Preserve the intended behavior as much as possible.

OUTPUT FORMAT (MANDATORY — JSON ONLY)
Return a single valid JSON object with exactly the following keys:
"result": "<semicolon-separated list of failing products, or empty string if none>",
"explanation": "<short explanation of the compilation issue(s), referencing macros and files when relevant; or a brief statement that no failing products exist>",
"fix": "<clear, concrete description of how to fix the compilation issue(s) so that all products compile under C99; or empty string if no fix is needed or cannot be confidently proposed>"

CONSTRAINTS
* If no failing products exist, set "result" to an empty string ("").
* If you cannot confidently propose a fix, set "fix" to an empty string ("").
* Do NOT include markdown, comments outside the JSON, or any additional keys.
* The output must be strictly valid JSON and directly machine-readable.
)";

inline std::string_view prompt_template(PromptKind kind) {
  return kind == PromptKind::FullCode ? kFullCodeTemplate : kDiffTemplate;
}

inline std::string build_prompt(PromptKind kind, std::string_view payload) {
  if (payload.empty()) throw std::invalid_argument("build_prompt: empty payload");
  std::string_view tmpl = prompt_template(kind);
  std::string_view slot = kind == PromptKind::FullCode ? "{{CODE}}" : "{{DIFF}}";
  size_t pos = tmpl.find(slot);
  std::string out;
  out.reserve(tmpl.size() + payload.size());
  out.append(tmpl.substr(0, pos));
  out.append(payload);
  out.append(tmpl.substr(pos + slot.size()));
  return out;
}

}  // namespace varcc::modelgw
