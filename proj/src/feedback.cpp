#include "gdfuzz/feedback.hpp"

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace gdfuzz {

namespace {

// ---------------------------------------------------------------------------
// builtin: euclid

constexpr int kRecursionCap = 10000;

struct Exec {
    RawFeedback fb;
    double budget; // instruction budget for built-in subjects
    bool stop = false;

    void cover(const char* unit) { fb.covered_units.insert(unit); }
    // One executed statement. Returns false once the budget is exhausted.
    bool tick() {
        if (stop) return false;
        fb.runtime += 1.0;
        if (fb.runtime >= budget) {
            fb.runtime = budget;
            fb.timed_out = true;
            fb.exception = "timeout";
            stop = true;
            return false;
        }
        return true;
    }
    void raise(const char* id) {
        if (!stop) fb.exception = id;
        stop = true;
    }
};

bool parse_uint(const std::string& s, std::size_t& pos, std::uint64_t& out) {
    if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) return false;
    std::uint64_t v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        unsigned d = static_cast<unsigned>(s[pos] - '0');
        if (v > (UINT64_MAX - d) / 10) v = UINT64_MAX; // saturate
        else v = v * 10 + d;
        ++pos;
    }
    out = v;
    return true;
}

RawFeedback run_euclid(const std::string& input, double timeout) {
    Exec e;
    e.budget = timeout;
    e.cover("parse-args");
    e.tick();

    const std::string prefix = "euclid(";
    if (input.compare(0, prefix.size(), prefix) != 0) {
        e.raise("FormatError");
        return e.fb;
    }
    std::size_t pos = prefix.size();
    std::uint64_t x = 0, y = 0;
    bool ok = parse_uint(input, pos, x);
    ok = ok && pos < input.size() && input[pos] == ',' && (++pos, true);
    ok = ok && parse_uint(input, pos, y);
    ok = ok && pos < input.size() && input[pos] == ')' && ++pos == input.size();
    if (!ok) {
        // well-formed prefix, malformed tail
        e.cover("format-error");
        e.raise("FormatError");
        return e.fb;
    }

    int depth = 0;
    while (!e.stop) {
        e.cover("entry");
        if (!e.tick()) break;
        if (x == 0) {
            e.cover("x==0-taken");
            e.tick();
            break; // returns 1
        }
        if (x < y) {
            e.cover("swap-taken");
            std::swap(x, y);
            e.tick();
        }
        e.cover("mod-test");
        if (!e.tick()) break;
        if (y == 0) {
            e.cover("div-by-zero-site");
            e.raise("DivisionByZero");
            break;
        }
        if (x % y == 0) {
            e.cover("return-y");
            e.tick();
            break; // returns y
        }
        e.cover("recurse");
        if (!e.tick()) break;
        std::uint64_t r = x % y;
        x = y;
        y = r;
        if (++depth > kRecursionCap) {
            e.raise("StackOverflow");
            break;
        }
    }
    return e.fb;
}

// ---------------------------------------------------------------------------
// builtin: json-flatten

constexpr int kJsonDepthCap = 512;

struct JsonSubjectError {
    const char* id;
};

struct JsonRunner {
    const std::string& in;
    Exec& e;
    std::size_t pos = 0;

    [[noreturn]] void raise(const char* id) { throw JsonSubjectError{id}; }

    void budget() {
        if (!e.tick()) throw JsonSubjectError{"timeout"};
    }
    char peek() {
        if (pos >= in.size()) raise("JsonSyntax");
        return in[pos];
    }
    void skip_ws() {
        while (pos < in.size() &&
               (in[pos] == ' ' || in[pos] == '\t' || in[pos] == '\n' || in[pos] == '\r')) {
            e.cover("ws");
            ++pos;
        }
    }

    void run() {
        e.cover("top");
        budget();
        skip_ws();
        value(0);
        skip_ws();
        if (pos != in.size()) raise("JsonSyntax");
    }

    void value(int depth) {
        if (depth > kJsonDepthCap) raise("TooDeep");
        e.cover("value");
        budget();
        char c = peek();
        if (c == '{') object(depth);
        else if (c == '[') array(depth);
        else if (c == '"') string_value();
        else if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) number();
        else if (c == 't') literal("true", "lit-true");
        else if (c == 'f') literal("false", "lit-false");
        else if (c == 'n') literal("null", "lit-null");
        else raise("JsonSyntax");
        if (c == '{' || c == '[') e.cover("flatten-nested");
        else e.cover("flatten-scalar");
    }

    void object(int depth) {
        e.cover("object-begin");
        ++pos;
        skip_ws();
        if (pos < in.size() && in[pos] == '}') {
            e.cover("object-empty");
            e.cover("object-end");
            ++pos;
            return;
        }
        while (true) {
            e.cover("object-member");
            budget();
            skip_ws();
            if (peek() != '"') raise("JsonSyntax");
            string_value();
            skip_ws();
            if (peek() != ':') raise("JsonSyntax");
            ++pos;
            skip_ws();
            value(depth + 1);
            skip_ws();
            char c = peek();
            if (c == ',') {
                ++pos;
                continue;
            }
            if (c == '}') {
                e.cover("object-end");
                ++pos;
                return;
            }
            raise("JsonSyntax");
        }
    }

    void array(int depth) {
        e.cover("array-begin");
        ++pos;
        skip_ws();
        if (pos < in.size() && in[pos] == ']') {
            e.cover("array-empty");
            e.cover("array-end");
            ++pos;
            return;
        }
        while (true) {
            e.cover("array-element");
            budget();
            skip_ws();
            value(depth + 1);
            skip_ws();
            char c = peek();
            if (c == ',') {
                ++pos;
                continue;
            }
            if (c == ']') {
                e.cover("array-end");
                ++pos;
                return;
            }
            raise("JsonSyntax");
        }
    }

    void string_value() {
        e.cover("string");
        ++pos; // opening quote
        while (true) {
            budget();
            if (pos >= in.size()) raise("JsonSyntax"); // unterminated string
            char c = in[pos++];
            if (c == '"') return;
            if (c != '\\') {
                e.cover("string-char");
                continue;
            }
            e.cover("string-escape");
            // defect: the escape reader assumes the escape is complete
            if (pos >= in.size()) raise("UnterminatedEscape");
            char esc = in[pos++];
            if (esc == 'u') {
                e.cover("escape-unicode");
                if (pos + 4 > in.size()) raise("UnterminatedEscape");
                for (int i = 0; i < 4; ++i) {
                    if (!std::isxdigit(static_cast<unsigned char>(in[pos]))) raise("JsonSyntax");
                    ++pos;
                }
            } else if (!std::strchr("\"\\/bfnrt", esc)) {
                raise("JsonSyntax");
            }
        }
    }

    void number() {
        e.cover("number");
        budget();
        if (in[pos] == '-') {
            e.cover("number-minus");
            ++pos;
        }
        if (pos >= in.size() || !std::isdigit(static_cast<unsigned char>(in[pos])))
            raise("JsonSyntax");
        while (pos < in.size() && std::isdigit(static_cast<unsigned char>(in[pos]))) ++pos;
        if (pos < in.size() && in[pos] == '.') {
            e.cover("number-frac");
            ++pos;
            if (pos >= in.size() || !std::isdigit(static_cast<unsigned char>(in[pos])))
                raise("JsonSyntax");
            while (pos < in.size() && std::isdigit(static_cast<unsigned char>(in[pos]))) ++pos;
        }
        if (pos < in.size() && (in[pos] == 'e' || in[pos] == 'E')) {
            e.cover("number-exp");
            ++pos;
            if (pos < in.size() && (in[pos] == '+' || in[pos] == '-')) ++pos;
            if (pos >= in.size() || !std::isdigit(static_cast<unsigned char>(in[pos])))
                raise("JsonSyntax");
            while (pos < in.size() && std::isdigit(static_cast<unsigned char>(in[pos]))) ++pos;
        }
    }

    void literal(const char* word, const char* unit) {
        std::size_t len = std::strlen(word);
        if (in.compare(pos, len, word) != 0) raise("JsonSyntax");
        e.cover(unit);
        pos += len;
    }
};

RawFeedback run_json_flatten(const std::string& input, double timeout) {
    Exec e;
    e.budget = timeout;
    JsonRunner runner{input, e};
    try {
        runner.run();
    } catch (const JsonSubjectError& err) {
        if (!e.fb.timed_out) e.fb.exception = err.id;
    }
    return e.fb;
}

// ---------------------------------------------------------------------------
// external subject protocol

struct SigpipeGuard {
    SigpipeGuard() { ::signal(SIGPIPE, SIG_IGN); }
};

RawFeedback run_external(const std::string& command, const std::string& input,
                         double timeout_ms) {
    static SigpipeGuard guard;

    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0)
        throw AdapterError("pipe() failed: " + std::string(std::strerror(errno)));

    pid_t pid = ::fork();
    if (pid < 0) throw AdapterError("fork() failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);

    auto start = std::chrono::steady_clock::now();
    // inputs are small relative to the pipe buffer; a single write suffices
    ssize_t wrote = ::write(in_pipe[1], input.data(), input.size());
    (void)wrote;
    ::close(in_pipe[1]);

    std::string output;
    bool killed = false;
    char buf[4096];
    while (true) {
        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        double remaining = timeout_ms - elapsed;
        if (remaining <= 0.0) {
            ::kill(pid, SIGKILL);
            killed = true;
            break;
        }
        struct pollfd pfd{out_pipe[0], POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(remaining) + 1);
        if (rc <= 0) continue;
        ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }
    ::close(out_pipe[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    double wall = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();

    RawFeedback fb;
    bool any_line = false;
    std::size_t pos = 0;
    while (pos < output.size()) {
        std::size_t nl = output.find('\n', pos);
        std::string line = output.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? output.size() : nl + 1;
        if (line.rfind("COV ", 0) == 0 && line.size() > 4) {
            fb.covered_units.insert(line.substr(4));
            any_line = true;
        } else if (line.rfind("EXC ", 0) == 0 && line.size() > 4) {
            fb.exception = line.substr(4);
            any_line = true;
        }
    }

    if (killed) {
        fb.timed_out = true;
        fb.runtime = timeout_ms;
        fb.exception = "timeout";
        return fb;
    }
    fb.runtime = std::min(wall, timeout_ms);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
    if (code == 127 && output.empty())
        throw AdapterError("failed to launch subject command: " + command);
    if (code != 0 && !fb.exception) fb.exception = "exit:" + std::to_string(code);
    (void)any_line;
    return fb;
}

} // namespace

RawFeedback run_subject(const SubjectAdapter& adapter, const std::string& input,
                        double timeout) {
    return adapter.run(input, timeout);
}

SubjectAdapter euclid_subject() {
    SubjectAdapter a;
    a.descriptor = "euclid";
    a.builtin = true;
    a.unit_universe = {"parse-args",  "format-error", "entry",
                       "x==0-taken", "swap-taken",   "mod-test",
                       "return-y",   "recurse",      "div-by-zero-site"};
    a.total_units = a.unit_universe.size();
    a.run = run_euclid;
    return a;
}

SubjectAdapter json_flatten_subject() {
    SubjectAdapter a;
    a.descriptor = "json-flatten";
    a.builtin = true;
    a.unit_universe = {"top",          "ws",           "value",         "object-begin",
                       "object-end",   "object-empty", "object-member", "array-begin",
                       "array-end",    "array-empty",  "array-element", "string",
                       "string-char",  "string-escape", "escape-unicode", "number",
                       "number-minus", "number-frac",  "number-exp",    "lit-true",
                       "lit-false",    "lit-null",     "flatten-scalar", "flatten-nested"};
    a.total_units = a.unit_universe.size();
    a.run = run_json_flatten;
    return a;
}

SubjectAdapter external_subject(const std::string& command, std::size_t total_units) {
    SubjectAdapter a;
    a.descriptor = command;
    a.builtin = false;
    a.total_units = total_units;
    a.run = [command](const std::string& input, double timeout) {
        return run_external(command, input, timeout);
    };
    return a;
}

} // namespace gdfuzz
