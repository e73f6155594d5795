#include "ketgpt/qasm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace ketgpt::qasm {

const std::vector<GateKind>& gate_table() {
    static const std::vector<GateKind> table = {
        {"h", 1, 0},   {"x", 1, 0},    {"y", 1, 0},   {"z", 1, 0},
        {"s", 1, 0},   {"sdg", 1, 0},  {"t", 1, 0},   {"tdg", 1, 0},
        {"rx", 1, 1},  {"ry", 1, 1},   {"rz", 1, 1},  {"u1", 1, 1},
        {"u2", 1, 2},  {"u3", 1, 3},   {"cx", 2, 0},  {"cz", 2, 0},
        {"cu1", 2, 1}, {"swap", 2, 0}, {"ccx", 3, 0}, {"id", 1, 0},
    };
    return table;
}

const GateKind* find_gate(std::string_view name) {
    for (const auto& g : gate_table())
        if (g.name == name) return &g;
    return nullptr;
}

int Circuit::total_qubits() const {
    int n = 0;
    for (const auto& [_, sz] : qreg_sizes) n += sz;
    return n;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string operand_text(const Operand& op) {
    return op.reg + "[" + std::to_string(op.index) + "]";
}

// Statement-splitting scanner. Comments stripped, positions tracked.
struct Scanner {
    std::string_view src;
    size_t pos = 0;
    int line = 1, col = 1;

    bool done() const { return pos >= src.size(); }
    char peek() const { return src[pos]; }
    void advance() {
        if (src[pos] == '\n') { line++; col = 1; } else { col++; }
        pos++;
    }
    void skip_ws_and_comments() {
        while (!done()) {
            char c = peek();
            if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
                while (!done() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }
};

struct RawStatement {
    std::string text;  // statement body without trailing ';', comments removed
    int line, col;
};

// Splits source into ';'-terminated raw statements.
std::vector<RawStatement> split_statements(std::string_view src, ParseMode mode,
                                           std::vector<std::string>* warnings) {
    std::vector<RawStatement> out;
    Scanner sc{src};
    for (;;) {
        sc.skip_ws_and_comments();
        if (sc.done()) break;
        RawStatement raw;
        raw.line = sc.line;
        raw.col = sc.col;
        bool terminated = false;
        while (!sc.done()) {
            char c = sc.peek();
            if (c == ';') { sc.advance(); terminated = true; break; }
            if (c == '/' && sc.pos + 1 < src.size() && src[sc.pos + 1] == '/') {
                while (!sc.done() && sc.peek() != '\n') sc.advance();
                continue;
            }
            raw.text.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
            sc.advance();
        }
        // collapse internal whitespace runs
        std::string squeezed;
        for (char c : raw.text) {
            if (c == ' ' && !squeezed.empty() && squeezed.back() == ' ') continue;
            squeezed.push_back(c);
        }
        while (!squeezed.empty() && squeezed.back() == ' ') squeezed.pop_back();
        raw.text = squeezed;
        if (!terminated && !raw.text.empty()) {
            if (mode == ParseMode::Strict)
                throw SyntaxError(raw.line, raw.col, "missing ';'");
            if (warnings)
                warnings->push_back("line " + std::to_string(raw.line) +
                                    ": statement missing ';' skipped");
            continue;
        }
        if (!raw.text.empty()) out.push_back(std::move(raw));
    }
    return out;
}

// Token-level cursor over one raw statement.
struct Cursor {
    std::string_view s;
    size_t i = 0;
    int line, col0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(line, col0 + static_cast<int>(i), msg);
    }
    void skip_ws() { while (i < s.size() && s[i] == ' ') i++; }
    bool done() { skip_ws(); return i >= s.size(); }
    bool accept(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) { i++; return true; }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip_ws();
        size_t start = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                                s[i] == '_')) i++;
        if (i == start) fail("expected identifier");
        return std::string(s.substr(start, i - start));
    }
    int integer() {
        skip_ws();
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) i++;
        if (i == start) fail("expected integer");
        int v = 0;
        std::from_chars(s.data() + start, s.data() + i, v);
        return v;
    }
    Operand operand() {
        Operand op;
        op.reg = ident();
        expect('[');
        op.index = integer();
        expect(']');
        return op;
    }
    // Raw text up to the matching ')' of an already-consumed '('.
    std::string balanced_until_close() {
        int depth = 1;
        std::string out;
        while (i < s.size()) {
            char c = s[i];
            if (c == '(') depth++;
            if (c == ')') {
                depth--;
                if (depth == 0) { i++; return out; }
            }
            out.push_back(c);
            i++;
        }
        fail("unbalanced '('");
    }
};

// Grammar: term (('*'|'/') term)*, term = ['-'] (number | 'pi' | '(' expr ')').
double eval_angle(std::string_view expr, const Cursor& ctx);

double eval_term(std::string_view& e, const Cursor& ctx) {
    while (!e.empty() && e.front() == ' ') e.remove_prefix(1);
    bool neg = false;
    while (!e.empty() && (e.front() == '-' || e.front() == '+')) {
        if (e.front() == '-') neg = !neg;
        e.remove_prefix(1);
        while (!e.empty() && e.front() == ' ') e.remove_prefix(1);
    }
    double v;
    if (e.starts_with("pi")) {
        v = std::numbers::pi;
        e.remove_prefix(2);
    } else if (e.starts_with("(")) {
        e.remove_prefix(1);
        int depth = 1;
        size_t j = 0;
        for (; j < e.size(); j++) {
            if (e[j] == '(') depth++;
            if (e[j] == ')' && --depth == 0) break;
        }
        if (j == e.size()) ctx.fail("unbalanced '(' in angle");
        v = eval_angle(e.substr(0, j), ctx);
        e.remove_prefix(j + 1);
    } else {
        const char* begin = e.data();
        char* end = nullptr;
        v = std::strtod(begin, &end);
        if (end == begin) ctx.fail("malformed angle expression");
        e.remove_prefix(static_cast<size_t>(end - begin));
    }
    return neg ? -v : v;
}

double eval_angle(std::string_view expr, const Cursor& ctx) {
    std::string_view e = expr;
    double v = eval_term(e, ctx);
    for (;;) {
        while (!e.empty() && e.front() == ' ') e.remove_prefix(1);
        if (e.empty()) return v;
        char op = e.front();
        if (op != '*' && op != '/') ctx.fail("malformed angle expression");
        e.remove_prefix(1);
        double rhs = eval_term(e, ctx);
        v = (op == '*') ? v * rhs : v / rhs;
    }
}

std::string trim(std::string_view s) {
    size_t a = s.find_first_not_of(' ');
    if (a == std::string_view::npos) return "";
    size_t b = s.find_last_not_of(' ');
    return std::string(s.substr(a, b - a + 1));
}

Statement parse_raw(const RawStatement& raw) {
    Cursor cur{raw.text, 0, raw.line, raw.col};
    Statement st;

    if (raw.text.starts_with("OPENQASM")) {
        st.kind = StatementKind::Header;
        if (trim(raw.text.substr(8)) != "2.0")
            cur.fail("unsupported OPENQASM version");
        return st;
    }
    if (raw.text.starts_with("include")) {
        st.kind = StatementKind::Include;
        if (trim(raw.text.substr(7)) != "\"qelib1.inc\"")
            cur.fail("only qelib1.inc includes are supported");
        return st;
    }

    std::string head = cur.ident();
    if (head == "qreg" || head == "creg") {
        st.kind = head == "qreg" ? StatementKind::QregDecl : StatementKind::CregDecl;
        st.reg_name = cur.ident();
        cur.expect('[');
        st.reg_size = cur.integer();
        cur.expect(']');
        if (!cur.done()) cur.fail("trailing tokens after declaration");
        return st;
    }
    if (head == "measure") {
        st.kind = StatementKind::Measure;
        st.qubits.push_back(cur.operand());
        cur.expect('-');
        cur.expect('>');
        st.clbits.push_back(cur.operand());
        if (!cur.done()) cur.fail("trailing tokens after measure");
        return st;
    }
    if (head == "barrier") {
        st.kind = StatementKind::Barrier;
        st.qubits.push_back(cur.operand());
        while (cur.accept(',')) st.qubits.push_back(cur.operand());
        if (!cur.done()) cur.fail("trailing tokens after barrier");
        return st;
    }

    const GateKind* gate = find_gate(head);
    if (!gate) cur.fail("unknown gate '" + head + "'");
    st.kind = StatementKind::GateApp;
    st.gate = gate;
    if (cur.accept('(')) {
        std::string args = cur.balanced_until_close();
        size_t start = 0;
        int depth = 0;
        for (size_t j = 0; j <= args.size(); j++) {
            if (j < args.size() && args[j] == '(') depth++;
            if (j < args.size() && args[j] == ')') depth--;
            if (j == args.size() || (args[j] == ',' && depth == 0)) {
                std::string piece = trim(std::string_view(args).substr(start, j - start));
                st.param_texts.push_back(piece);
                st.params.push_back(eval_angle(piece, cur));
                start = j + 1;
            }
        }
    }
    if (static_cast<int>(st.params.size()) != gate->param_count)
        cur.fail("gate '" + head + "' expects " +
                 std::to_string(gate->param_count) + " parameter(s)");
    st.qubits.push_back(cur.operand());
    while (cur.accept(',')) st.qubits.push_back(cur.operand());
    if (static_cast<int>(st.qubits.size()) != gate->arity)
        cur.fail("gate '" + head + "' expects " + std::to_string(gate->arity) +
                 " qubit operand(s)");
    if (!cur.done()) cur.fail("trailing tokens after gate application");
    return st;
}

}  // namespace

std::string Statement::text() const {
    std::string out;
    switch (kind) {
        case StatementKind::Header:  return "OPENQASM 2.0;";
        case StatementKind::Include: return "include \"qelib1.inc\";";
        case StatementKind::QregDecl:
            return "qreg " + reg_name + "[" + std::to_string(reg_size) + "];";
        case StatementKind::CregDecl:
            return "creg " + reg_name + "[" + std::to_string(reg_size) + "];";
        case StatementKind::Measure:
            return "measure " + operand_text(qubits[0]) + " -> " +
                   operand_text(clbits[0]) + ";";
        case StatementKind::Barrier:
            out = "barrier ";
            break;
        case StatementKind::GateApp:
            out = std::string(gate->name);
            if (!params.empty()) {
                out.push_back('(');
                for (size_t i = 0; i < params.size(); i++) {
                    if (i) out.push_back(',');
                    out += i < param_texts.size() && !param_texts[i].empty()
                               ? param_texts[i]
                               : format_double(params[i]);
                }
                out.push_back(')');
            }
            out.push_back(' ');
            break;
    }
    for (size_t i = 0; i < qubits.size(); i++) {
        if (i) out.push_back(',');
        out += operand_text(qubits[i]);
    }
    out.push_back(';');
    return out;
}

ParseResult parse(std::string_view text, ParseMode mode) {
    ParseResult res;
    auto raws = split_statements(text, mode, &res.warnings);
    for (const auto& raw : raws) {
        try {
            Statement st = parse_raw(raw);
            if (st.kind == StatementKind::QregDecl)
                res.circuit.qreg_sizes[st.reg_name] = st.reg_size;
            if (st.kind == StatementKind::CregDecl)
                res.circuit.creg_sizes[st.reg_name] = st.reg_size;
            res.circuit.statements.push_back(std::move(st));
        } catch (const SyntaxError& e) {
            if (mode == ParseMode::Strict) throw;
            res.warnings.push_back(e.what());
        }
    }
    return res;
}

Statement parse_statement(std::string_view text) {
    auto raws = split_statements(text, ParseMode::Strict, nullptr);
    if (raws.size() != 1)
        throw SyntaxError(1, 1, "expected exactly one statement");
    return parse_raw(raws[0]);
}

ValidationReport validate(const Circuit& c) {
    ValidationReport rep;
    auto add = [&](ViolationKind kind, int idx, std::string msg) {
        rep.violations.push_back({kind, idx, std::move(msg)});
    };

    const auto& st = c.statements;
    bool header_ok = st.size() >= 3 && st[0].kind == StatementKind::Header &&
                     st[1].kind == StatementKind::Include &&
                     st[2].kind == StatementKind::QregDecl;
    if (!header_ok)
        add(ViolationKind::MissingHeader, -1,
            "circuit must begin with OPENQASM 2.0; include; qreg");

    for (size_t i = 0; i < st.size(); i++) {
        const Statement& s = st[i];
        auto check_operands = [&](const std::vector<Operand>& ops,
                                  const std::map<std::string, int>& regs,
                                  const char* what) {
            for (const auto& op : ops) {
                auto it = regs.find(op.reg);
                if (it == regs.end()) {
                    add(ViolationKind::UndeclaredRegister, static_cast<int>(i),
                        std::string(what) + " register '" + op.reg +
                            "' not declared");
                } else if (op.index < 0 || op.index >= it->second) {
                    add(ViolationKind::IndexOutOfRange, static_cast<int>(i),
                        operand_text(op) + " out of range for " + what +
                            " register of size " + std::to_string(it->second));
                }
            }
        };
        switch (s.kind) {
            case StatementKind::GateApp: {
                check_operands(s.qubits, c.qreg_sizes, "quantum");
                std::set<std::pair<std::string, int>> seen;
                for (const auto& op : s.qubits)
                    if (!seen.insert({op.reg, op.index}).second)
                        add(ViolationKind::DuplicateOperand, static_cast<int>(i),
                            "duplicate operand " + operand_text(op));
                for (double p : s.params)
                    if (!std::isfinite(p))
                        add(ViolationKind::MalformedParam, static_cast<int>(i),
                            "non-finite angle parameter");
                break;
            }
            case StatementKind::Measure:
                check_operands(s.qubits, c.qreg_sizes, "quantum");
                check_operands(s.clbits, c.creg_sizes, "classical");
                break;
            case StatementKind::Barrier:
                check_operands(s.qubits, c.qreg_sizes, "quantum");
                break;
            default:
                break;
        }
    }
    return rep;
}

std::string serialize(const Circuit& c) {
    std::string out;
    for (const auto& s : c.statements) {
        out += s.text();
        out.push_back('\n');
    }
    return out;
}

int gate_count(const Circuit& c) {
    int n = 0;
    for (const auto& s : c.statements)
        if (s.kind == StatementKind::GateApp || s.kind == StatementKind::Measure)
            n++;
    return n;
}

const char* violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::MissingHeader:      return "MissingHeader";
        case ViolationKind::UndeclaredRegister: return "UndeclaredRegister";
        case ViolationKind::IndexOutOfRange:    return "IndexOutOfRange";
        case ViolationKind::DuplicateOperand:   return "DuplicateOperand";
        case ViolationKind::MalformedParam:     return "MalformedParam";
    }
    return "?";
}

}  // namespace ketgpt::qasm
