#include <charconv>
#include <sstream>
#include <string>

#include "molforge/diffop.hpp"
#include "molforge/error.hpp"

namespace molforge::diffop {

namespace {

// Coefficients for unit spacing. `stencil` lists offsets -half..half, `norm`
// the leading diagonal-norm weights, `block` one boundary-closure row per line.
constexpr std::string_view kTable = R"(# name / kind / orders (interior boundary)
operator d21
kind first
orders 2 1
stencil -1/2 0 1/2
norm 1/2
block -1 1
end

operator d42
kind first
orders 4 2
stencil 1/12 -2/3 0 2/3 -1/12
norm 17/48 59/48 43/48 49/48
block -24/17 59/34 -4/17 -3/34 0 0
block -1/2 0 1/2 0 0 0
block 4/43 -59/86 0 59/86 -4/43 0
block 3/98 0 -59/98 0 32/49 -4/49
end

operator d43_2
kind second
orders 4 2
stencil -1/12 4/3 -5/2 4/3 -1/12
norm 17/48 59/48 43/48 49/48
block 2 -5 4 -1 0 0
block 1 -2 1 0 0 0
block -4/43 59/43 -110/43 59/43 -4/43 0
block -1/49 0 59/49 -118/49 64/49 -4/49
end

# -H^-1 D2^T D2 with D2 the undivided second difference, d42 norm
operator diss42
kind dissipation
orders 2 1
stencil -1 4 -6 4 -1
norm 17/48 59/48 43/48 49/48
block -48/17 96/17 -48/17 0 0 0
block 96/59 -240/59 192/59 -48/59 0 0
block -48/43 192/43 -288/43 192/43 -48/43 0
block 0 -48/49 192/49 -288/49 192/49 -48/49
end
)";

double parse_number(std::string_view token) {
  auto to_double = [&](std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw OperatorError("bad number in operator table: " + std::string(token));
    return v;
  };
  if (auto slash = token.find('/'); slash != std::string_view::npos)
    return to_double(token.substr(0, slash)) / to_double(token.substr(slash + 1));
  return to_double(token);
}

std::vector<double> parse_row(std::istringstream& in) {
  std::vector<double> row;
  std::string tok;
  while (in >> tok) row.push_back(parse_number(tok));
  return row;
}

void validate(const SBPOperator& op) {
  auto fail = [&](const std::string& why) {
    throw OperatorError("operator " + op.name + ": " + why);
  };
  if (op.interior_stencil.size() % 2 == 0) fail("interior stencil must have odd length");
  if (op.boundary_block.empty()) fail("missing boundary block");
  for (const auto& row : op.boundary_block)
    if (row.size() != op.block_width()) fail("ragged boundary block");
  if (op.norm_weights.empty() || op.norm_weights.size() > op.closure_rows())
    fail("norm weights must cover 1..r rows");
  for (double w : op.norm_weights)
    if (!(w > 0.0)) fail("norm weights must be positive");
  if (op.closure_rows() < op.half_width()) fail("closure shorter than stencil half-width");
}

}  // namespace

std::string_view operator_table_text() { return kTable; }

std::vector<SBPOperator> parse_operator_table(std::string_view text) {
  std::vector<SBPOperator> ops;
  std::istringstream lines{std::string(text)};
  std::string line;
  SBPOperator* cur = nullptr;
  while (std::getline(lines, line)) {
    std::istringstream in(line);
    std::string key;
    if (!(in >> key) || key.front() == '#') continue;
    if (key == "operator") {
      ops.emplace_back();
      cur = &ops.back();
      in >> cur->name;
      continue;
    }
    if (!cur) throw OperatorError("operator table: '" + key + "' outside an operator entry");
    if (key == "kind") {
      std::string k;
      in >> k;
      if (k == "first")
        cur->kind = OperatorKind::FirstDerivative;
      else if (k == "second")
        cur->kind = OperatorKind::SecondDerivative;
      else if (k == "dissipation")
        cur->kind = OperatorKind::Dissipation;
      else
        throw OperatorError("operator table: unknown kind " + k);
    } else if (key == "orders") {
      in >> cur->interior_order >> cur->boundary_order;
    } else if (key == "stencil") {
      cur->interior_stencil = parse_row(in);
    } else if (key == "norm") {
      cur->norm_weights = parse_row(in);
    } else if (key == "block") {
      cur->boundary_block.push_back(parse_row(in));
    } else if (key == "end") {
      validate(*cur);
      cur = nullptr;
    } else {
      throw OperatorError("operator table: unknown key " + key);
    }
  }
  if (cur) throw OperatorError("operator table: unterminated entry " + cur->name);
  return ops;
}

const std::vector<SBPOperator>& operator_catalog() {
  static const std::vector<SBPOperator> catalog = parse_operator_table(kTable);
  return catalog;
}

const SBPOperator& lookup(std::string_view name) {
  for (const auto& op : operator_catalog())
    if (op.name == name) return op;
  throw OperatorError("unknown operator " + std::string(name));
}

const SBPOperator& d21() { return lookup("d21"); }
const SBPOperator& d42() { return lookup("d42"); }
const SBPOperator& d43_2() { return lookup("d43_2"); }
const SBPOperator& diss42() { return lookup("diss42"); }

}  // namespace molforge::diffop
