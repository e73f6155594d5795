#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ketgpt::qasm {

// Gate set covered by the grammar subset. `measure` and `barrier` are
// handled as their own statement kinds but share the operand machinery.
struct GateKind {
    std::string_view name;
    int arity;        // qubit operands
    int param_count;  // angle parameters
};

const GateKind* find_gate(std::string_view name);
const std::vector<GateKind>& gate_table();

enum class StatementKind {
    Header,
    Include,
    QregDecl,
    CregDecl,
    GateApp,
    Measure,
    Barrier,
};

struct Operand {
    std::string reg;
    int index = 0;
    bool operator==(const Operand&) const = default;
};

struct Statement {
    StatementKind kind = StatementKind::GateApp;
    const GateKind* gate = nullptr;  // GateApp only
    std::string reg_name;            // declarations only
    int reg_size = 0;                // declarations only
    std::vector<Operand> qubits;
    std::vector<Operand> clbits;     // measure target
    std::vector<double> params;
    std::vector<std::string> param_texts;  // original spelling, e.g. "pi/2"

    // Canonical single-line rendering with trailing ';'.
    std::string text() const;

    bool operator==(const Statement& o) const { return text() == o.text(); }
};

struct Circuit {
    std::vector<Statement> statements;
    std::map<std::string, int> qreg_sizes;
    std::map<std::string, int> creg_sizes;

    int total_qubits() const;
};

struct SyntaxError : std::runtime_error {
    int line, column;
    SyntaxError(int line_, int col_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": " + msg),
          line(line_), column(col_) {}
};

enum class ViolationKind {
    MissingHeader,
    UndeclaredRegister,
    IndexOutOfRange,
    DuplicateOperand,
    MalformedParam,
};

struct Violation {
    ViolationKind kind;
    int statement_index;  // -1 for circuit-level violations
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

enum class ParseMode { Strict, Lenient };

struct ParseResult {
    Circuit circuit;
    std::vector<std::string> warnings;  // lenient mode only
};

ParseResult parse(std::string_view text, ParseMode mode = ParseMode::Strict);

// Parses a single statement (used for vocabulary entries). Strict.
Statement parse_statement(std::string_view text);

ValidationReport validate(const Circuit& c);

std::string serialize(const Circuit& c);

// gate_app + measure statements; declarations, header, include, barrier excluded.
int gate_count(const Circuit& c);

const char* violation_name(ViolationKind k);

}  // namespace ketgpt::qasm
