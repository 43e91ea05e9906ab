#pragma once

#include <string>
#include <variant>
#include <vector>

#include "pia/dsl.hpp"

namespace pia {

enum class Counter { B, C };

struct Inc {
    Counter c = Counter::B;
    int go = 0;
};
struct TestDec {
    Counter c = Counter::B;
    int go_zero = 0;
    int go_dec = 0;
};
struct Halt {};

using Statement = std::variant<Inc, TestDec, Halt>;

// Statements 0..m; m is the only halt.
struct TwoCounterMachine {
    std::vector<Statement> statements;
    [[nodiscard]] int m() const { return static_cast<int>(statements.size()) - 1; }
};

// "0: inc B goto 1; 1: if C == 0 goto 2 else dec C goto 0; 2: halt"
// Statements are separated by ';' or newlines. Throws ParseError.
[[nodiscard]] TwoCounterMachine parse_2cm(const std::string& text);
[[nodiscard]] std::string to_string(const TwoCounterMachine& m);

// Non-communicating skeleton A(M) over one parameter n with N = n + 1 processes
// (one control process, n data processes), plus the handshake specification:
// HS_v_w per increment/decrement edge, EQ0_v_w per zero test, CP and nonhalt.
[[nodiscard]] Model build_2cm_cfa(const TwoCounterMachine& m);

[[nodiscard]] std::string control_status(int v, int w, const std::string& phase);  // IdlC, SynC, AckC
[[nodiscard]] std::string data_status(char x, char y, const std::string& phase);    // IdlD, SynD, AckD

}  // namespace pia
