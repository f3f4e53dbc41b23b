#pragma once

#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdfuzz {

struct AdapterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-execution observations. Subject-level failures are data, never
/// exceptions of the harness; at most one exception id per execution.
struct RawFeedback {
    std::set<std::string> covered_units;
    std::optional<std::string> exception;
    // Executed-instruction count for built-in subjects, wall milliseconds
    // for external subjects. Equals the configured timeout when timed_out.
    double runtime = 0.0;
    bool timed_out = false;
};

struct SubjectAdapter {
    std::string descriptor;  // builtin name or external command line
    bool builtin = true;
    std::size_t total_units = 0; // b_tot
    // Declared unit universe for built-in subjects (empty for external).
    std::vector<std::string> unit_universe;
    std::function<RawFeedback(const std::string& input, double timeout)> run;
};

/// Executes the subject on the input. Timeout is an instruction budget
/// for built-in subjects and milliseconds for external ones. Throws
/// AdapterError only for launch failures; everything the subject does is
/// reported in the feedback.
RawFeedback run_subject(const SubjectAdapter& adapter, const std::string& input,
                        double timeout);

/// In-process gcd subject with the division-by-zero defect reachable via
/// y = 0 and 9 instrumented coverage points. Inputs must match
/// euclid(<digits>,<digits>); anything else reports exception
/// "FormatError". Recursion is capped at 10000 ("StackOverflow").
SubjectAdapter euclid_subject();

/// In-process JSON reader + flattener with 24 coverage points and a
/// reachable defect in escape handling (truncated escapes surface as
/// exception "UnterminatedEscape").
SubjectAdapter json_flatten_subject();

/// Subject launched per input via /bin/sh -c. Input bytes go to stdin;
/// stdout lines `COV <unit>` and at most one `EXC <id>` are collected.
/// Nonzero exit without an EXC line reports exception "exit:<code>";
/// exit 127 with no output at all is treated as a launch failure. On
/// timeout the process is killed and the partial coverage kept.
SubjectAdapter external_subject(const std::string& command, std::size_t total_units);

} // namespace gdfuzz
