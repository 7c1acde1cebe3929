// Copyright 2026 The decohere Authors
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

#include "decohere/cli/app.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "decohere/cli/family_io.hpp"
#include "decohere/cli/json_text.hpp"
#include "decohere/coarse.hpp"
#include "decohere/errors.hpp"
#include "decohere/graphs.hpp"
#include "decohere/lp.hpp"
#include "decohere/search.hpp"

#ifndef DECOHERE_VERSION
#define DECOHERE_VERSION "0.0.0"
#endif

namespace decohere::cli {

using nlohmann::json;

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

/// Parses `path` with file-prefixed error locations.
HistoryFamily load_family(const std::string& path, const Tolerance& tol) {
  const std::string text = read_file(path);
  try {
    return parse_family(text, tol);
  } catch (const InputError& e) {
    std::string msg = path + ":";
    if (!e.where().empty()) msg += e.where() + ":";
    msg += " " + std::string(e.what());
    if (!e.pointer().empty()) msg += " (at " + e.pointer() + ")";
    throw InputError(msg);
  }
}

json envelope(const std::string& command, const Tolerance& tol) {
  return {{"tool", "decohere"},
          {"version", DECOHERE_VERSION},
          {"command", command},
          {"tolerance", {{"eps_zero", tol.eps_zero}, {"eps_prob", tol.eps_prob}}}};
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string block_label(const HistoryFamily& f, std::size_t t, const Block& block) {
  std::string s;
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (i > 0) s += "+";
    s += f.times()[t].projector_labels()[block[i]];
  }
  return s;
}

std::string coarse_name(const HistoryFamily& f, const CoarseGraining& g, const Branch& coarse) {
  std::string s;
  for (std::size_t t = 0; t < coarse.size(); ++t) {
    if (t > 0) s += ">";
    s += block_label(f, t, g.partitions()[t][coarse[t]]);
  }
  return s;
}

json partitions_json(const CoarseGraining& g) {
  json out = json::array();
  for (const auto& p : g.partitions()) out.push_back(p);
  return out;
}

json witness_json(const HistoryFamily& f, const Witness& w) {
  json j{{"value", w.value}, {"magnitude", w.magnitude}};
  if (w.graining) {
    j["graining"] = describe(f, *w.graining);
    j["partitions"] = partitions_json(*w.graining);
  }
  if (w.pair) j["branches"] = {f.branch_name(w.pair->first), f.branch_name(w.pair->second)};
  return j;
}

std::string witness_text(const HistoryFamily& f, DecoherenceLevel level, const Witness& w) {
  if (w.graining) return "residual " + format_number(w.value) + " for " + describe(f, *w.graining);
  const std::string pair = "(" + f.branch_name(w.pair->first) + ", " + f.branch_name(w.pair->second) + ")";
  if (level == DecoherenceLevel::weak) return "Re D" + pair + " = " + format_number(w.value);
  return "|D" + pair + "| = " + format_number(w.value);
}

json sum_rule_json(const HistoryFamily& f, const SumRuleReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json fine = json::array();
    for (const auto& h : row.fine_branches) fine.push_back(f.branch_name(h));
    rows.push_back({{"coarse_branch", coarse_name(f, r.graining, row.coarse_branch)},
                    {"coarse_probability", row.coarse_probability},
                    {"fine_sum", row.fine_sum},
                    {"residual", row.residual},
                    {"fine_branches", fine}});
  }
  return {{"graining", describe(f, r.graining)},
          {"partitions", partitions_json(r.graining)},
          {"max_abs_residual", r.max_abs_residual},
          {"pass", r.pass},
          {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Commands

int cmd_check(Context& c, const std::string& path, const std::string& level_name, const Tolerance& tol,
              bool as_json) {
  const auto f = load_family(path, tol);
  DecoherenceLevel level = DecoherenceLevel::minimal;
  if (level_name == "weak") level = DecoherenceLevel::weak;
  if (level_name == "medium") level = DecoherenceLevel::medium;
  const auto v = check_level(f, level, tol);
  const std::size_t shown = 20;

  if (as_json) {
    json j = envelope("check", tol);
    j["level"] = std::string(to_string(level));
    j["pass"] = v.pass;
    j["checked"] = v.checked;
    j["worst"] = v.worst ? witness_json(f, *v.worst) : json(nullptr);
    json violations = json::array();
    for (const auto& w : v.violations) violations.push_back(witness_json(f, w));
    j["violations"] = violations;
    if (level == DecoherenceLevel::minimal) {
      json reports = json::array();
      for (const auto& g : enumerate_grainings(f)) reports.push_back(sum_rule_json(f, check_sum_rule(f, g, tol)));
      j["sum_rules"] = reports;
    }
    c.out << dump_json(j);
  } else {
    const char* unit = level == DecoherenceLevel::minimal ? "coarse-grainings" : "branch pairs";
    c.out << "level:   " << to_string(level) << "\n";
    c.out << "verdict: " << (v.pass ? "PASS" : "FAIL") << "\n";
    c.out << "checked: " << v.checked << " " << unit << "\n";
    c.out << "worst:   " << (v.worst ? witness_text(f, level, *v.worst) : std::string("none (nothing to check)")) << "\n";
    if (!v.violations.empty()) {
      c.out << "violations (" << v.violations.size() << "):\n";
      for (std::size_t i = 0; i < v.violations.size() && i < shown; ++i) {
        c.out << "  " << witness_text(f, level, v.violations[i]) << "\n";
      }
      if (v.violations.size() > shown) c.out << "  ... and " << v.violations.size() - shown << " more\n";
    }
  }
  return v.pass ? kPass : kCheckFailed;
}

int cmd_probs(Context& c, const std::string& path, const Tolerance& tol, bool as_json) {
  const auto f = load_family(path, tol);
  const auto branches = f.branches();
  std::vector<double> probs;
  double total = 0.0;
  for (const auto& h : branches) {
    probs.push_back(probability(f, h, tol));
    total += probs.back();
  }
  const auto finals = final_state_probabilities(f);
  const auto& final_labels = f.times().back().projector_labels();
  if (as_json) {
    json j = envelope("probs", tol);
    json rows = json::array();
    for (std::size_t i = 0; i < branches.size(); ++i) {
      rows.push_back({{"branch", f.branch_name(branches[i])}, {"probability", probs[i]}});
    }
    j["branches"] = rows;
    json fin = json::object();
    for (const auto& [idx, p] : finals) fin[final_labels[idx]] = p;
    j["final_state"] = fin;
    j["total"] = total;
    c.out << dump_json(j);
    return kPass;
  }
  std::size_t width = 8;
  for (const auto& h : branches) width = std::max(width, f.branch_name(h).size() + 2);
  c.out << pad("branch", width) << "probability\n";
  for (std::size_t i = 0; i < branches.size(); ++i) {
    c.out << pad(f.branch_name(branches[i]), width) << format_number(probs[i]) << "\n";
  }
  c.out << pad("total", width) << format_number(total) << "\n\n";
  c.out << pad("final", width) << "probability\n";
  for (const auto& [idx, p] : finals) c.out << pad(final_labels[idx], width) << format_number(p) << "\n";
  return kPass;
}

int cmd_lp(Context& c, const std::string& path, const Tolerance& tol, bool as_json) {
  const auto f = load_family(path, tol);
  const auto r = lp_report(f, tol);
  if (as_json) {
    json j = envelope("lp", tol);
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"branch", f.branch_name(row.branch)},
                      {"lp_value", row.lp_value},
                      {"born_value", row.born_value},
                      {"lp_negative", row.lp_negative},
                      {"mismatch", row.mismatch}});
    }
    j["rows"] = rows;
    j["family_weak"] = r.family_weak;
    j["mismatches"] = r.mismatches();
    j["negatives"] = r.negatives();
    c.out << dump_json(j);
    return kPass;
  }
  std::size_t width = 8;
  for (const auto& row : r.rows) width = std::max(width, f.branch_name(row.branch).size() + 2);
  c.out << pad("branch", width) << pad("lp", 22) << pad("born", 22) << "flags\n";
  for (const auto& row : r.rows) {
    std::string flags;
    if (row.mismatch) flags += "mismatch ";
    if (row.lp_negative) flags += "negative";
    c.out << pad(f.branch_name(row.branch), width) << pad(format_number(row.lp_value), 22)
          << pad(format_number(row.born_value), 22) << flags << "\n";
  }
  c.out << "weakly decoherent: " << (r.family_weak ? "yes" : "no") << "\n";
  c.out << "mismatches: " << r.mismatches() << ", negative: " << r.negatives() << "\n";
  return kPass;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

int cmd_sumrule(Context& c, const std::string& path, const std::string& set_text, const Tolerance& tol,
                bool as_json) {
  const auto f = load_family(path, tol);
  std::vector<Branch> set;
  for (const auto& part : split(set_text, '+')) {
    if (part.empty()) throw InputError("empty branch in --set '" + set_text + "'");
    set.push_back(branch_from_labels(f, split(part, ',')));
  }
  const auto r = check_history_sum_rule(f, set, tol);
  if (as_json) {
    json j = envelope("sumrule", tol);
    json names = json::array();
    for (const auto& h : set) names.push_back(f.branch_name(h));
    j["set"] = names;
    j["quantity"] = r.quantity;
    j["prob_sum"] = r.prob_sum;
    j["residual"] = r.residual;
    j["pass"] = r.pass;
    c.out << dump_json(j);
  } else {
    c.out << "set:          ";
    for (std::size_t i = 0; i < set.size(); ++i) c.out << (i ? ", " : "") << f.branch_name(set[i]);
    c.out << "\n";
    c.out << "quantity:     " << format_number(r.quantity) << "\n";
    c.out << "probability:  " << format_number(r.prob_sum) << "\n";
    c.out << "residual:     " << format_number(r.residual) << "\n";
    c.out << "verdict:      " << (r.pass ? "PASS" : "FAIL") << "\n";
  }
  return r.pass ? kPass : kCheckFailed;
}

int cmd_graph(Context& c, const std::string& path, const std::string& output, const Tolerance& tol) {
  const auto f = load_family(path, tol);
  const auto g = build_graph(f);
  const std::string dot = to_dot(g);
  if (output.empty()) {
    c.out << dot;
  } else {
    write_file(output, dot);
    c.out << "wrote " << output << ": " << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
  }
  return kPass;
}

int cmd_sample(Context& c, const std::string& path, std::uint64_t n, std::uint64_t seed, const Tolerance& tol,
               bool as_json) {
  const auto f = load_family(path, tol);
  const auto counts = sample_branches(f, n, seed);
  struct Row {
    std::string name;
    std::uint64_t count;
    double expected;
    double z;
  };
  std::vector<Row> rows;
  for (const auto& h : f.branches()) {
    const auto it = counts.counts.find(h);
    const std::uint64_t k = it == counts.counts.end() ? 0 : it->second;
    const double p = probability(f, h, tol);
    const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
    const double z = sd > 0.0 ? (static_cast<double>(k) - static_cast<double>(n) * p) / sd : 0.0;
    rows.push_back({f.branch_name(h), k, p, z});
  }
  if (as_json) {
    json j = envelope("sample", tol);
    j["n"] = n;
    j["seed"] = seed;
    j["out_of_family"] = counts.out_of_family;
    json per = json::object();
    for (const auto& r : rows) per[r.name] = {{"count", r.count}, {"probability", r.expected}, {"z", r.z}};
    j["counts"] = per;
    c.out << dump_json(j);
    return kPass;
  }
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.name.size() + 2);
  c.out << pad("branch", width) << pad("count", 12) << pad("frequency", 14) << pad("probability", 22) << "z\n";
  for (const auto& r : rows) {
    std::ostringstream freq;
    freq << std::setprecision(6) << (n ? static_cast<double>(r.count) / static_cast<double>(n) : 0.0);
    std::ostringstream z;
    z << std::fixed << std::setprecision(2) << r.z;
    c.out << pad(r.name, width) << pad(std::to_string(r.count), 12) << pad(freq.str(), 14)
          << pad(format_number(r.expected), 22) << z.str() << "\n";
  }
  c.out << "out of family: " << counts.out_of_family << " of " << counts.total << "\n";
  return kPass;
}

/// Regression of the worked example's published values.
struct ReferenceCheck {
  std::string name;
  double got;
  double want;
};

std::vector<ReferenceCheck> reference_checks(const HistoryFamily& f) {
  auto b = [](int j, int k, int fin) {
    return Branch{{static_cast<std::size_t>(j - 1), static_cast<std::size_t>(k - 3), static_cast<std::size_t>(fin - 6)}};
  };
  std::vector<ReferenceCheck> out;
  double total = 0.0;
  for (const auto& h : f.branches()) {
    const double p = probability(f, h);
    total += p;
    out.push_back({"p(" + f.branch_name(h) + ")", p, h[2] == 2 ? 0.25 : 1.0 / 16});
  }
  out.push_back({"sum of probabilities", total, 1.0});
  const auto finals = final_state_probabilities(f);
  out.push_back({"p(final 6)", finals.at(0), 0.25});
  out.push_back({"p(final 7)", finals.at(1), 0.25});
  out.push_back({"p(final 8)", finals.at(2), 0.5});
  const struct {
    Branch a, b;
    double want;
  } quad[] = {{b(1, 3, 6), b(2, 4, 6), 1.0 / 16},
              {b(1, 4, 6), b(2, 3, 6), -1.0 / 16},
              {b(1, 3, 7), b(2, 4, 7), -1.0 / 16},
              {b(1, 4, 7), b(2, 3, 7), 1.0 / 16}};
  for (const auto& q : quad) {
    out.push_back({"Re D(" + f.branch_name(q.a) + ", " + f.branch_name(q.b) + ")",
                   decoherence_functional(f, q.a, q.b).real(), q.want});
  }
  const auto minimal = check_minimal(f);
  out.push_back({"max projection sum rule residual", minimal.worst ? minimal.worst->magnitude : 0.0, 0.0});
  const auto weak = check_weak(f);
  out.push_back({"max |Re D| over distinct pairs", weak.worst ? weak.worst->magnitude : 0.0, 1.0 / 16});
  const auto medium = check_medium(f);
  out.push_back({"medium decoherence fails", medium.pass ? 0.0 : 1.0, 1.0});
  const struct {
    std::vector<Branch> set;
    double want;
  } sums[] = {{{b(1, 3, 6), b(2, 4, 6)}, 0.25},
              {{b(1, 3, 7), b(2, 4, 7)}, 0.0},
              {{b(1, 4, 6), b(2, 3, 6)}, 0.0},
              {{b(1, 4, 7), b(2, 3, 7)}, 0.25}};
  for (const auto& s : sums) {
    const auto r = check_history_sum_rule(f, s.set);
    const std::string name = "{" + f.branch_name(s.set[0]) + ", " + f.branch_name(s.set[1]) + "}";
    out.push_back({"history sum " + name, r.quantity, s.want});
    out.push_back({"probability sum " + name, r.prob_sum, 0.125});
  }
  const auto lp = lp_report(f);
  for (const auto& row : lp.rows) {
    const bool first_diag = (row.branch[0] == 0) == (row.branch[1] == 0);
    double want = first_diag ? 0.125 : 0.0;
    if (row.branch[2] == 1) want = first_diag ? 0.0 : 0.125;
    if (row.branch[2] == 2) want = 0.25;
    out.push_back({"lp(" + f.branch_name(row.branch) + ")", row.lp_value, want});
  }
  out.push_back({"lp mismatches", static_cast<double>(lp.mismatches()), 8.0});
  return out;
}

int cmd_example(Context& c, const std::string& name, bool verify, const std::string& output) {
  if (name != "paper") throw InputError("unknown example '" + name + "' (available: paper)");
  const auto f = paper_example();
  if (!output.empty()) write_file(output, dump_json(family_to_json(f)));
  std::size_t width = 8;
  c.out << pad("branch", width) << "probability\n";
  for (const auto& h : f.branches()) c.out << pad(f.branch_name(h), width) << format_number(probability(f, h)) << "\n";
  if (!verify) return kPass;
  c.out << "\n";
  bool ok = true;
  for (const auto& chk : reference_checks(f)) {
    const bool pass = std::abs(chk.got - chk.want) <= 1e-12;
    ok = ok && pass;
    c.out << (pass ? "ok   " : "FAIL ") << pad(chk.name, 44) << format_number(chk.got) << "\n";
  }
  c.out << (ok ? "all reference values reproduced\n" : "reference values NOT reproduced\n");
  return ok ? kPass : kCheckFailed;
}

int cmd_search(Context& c, SearchParams params, const std::string& slots_text, const std::string& init,
               const std::string& output, bool as_json) {
  std::optional<HistoryFamily> start;
  if (!init.empty()) {
    start = load_family(init, {});
  } else if (!slots_text.empty()) {
    params.slot_sizes.clear();
    for (const auto& s : split(slots_text, ',')) {
      std::size_t used = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (s.empty() || used != s.size()) throw InputError("--slots expects comma-separated sizes, got '" + slots_text + "'");
      params.slot_sizes.push_back(v);
    }
  }
  try {
    params.validate();
  } catch (const Error& e) {
    if (!start) throw InputError(e.what());
  }
  const auto o = search_minimal_not_weak(params, start);
  if (!output.empty() && o.family) write_file(output, dump_json(family_to_json(*o.family)));
  if (as_json) {
    json j = envelope("search", Tolerance{});
    j["found"] = o.found;
    j["minimal_residual"] = o.minimal_residual;
    j["max_weak_violation"] = o.max_weak_violation;
    j["objective"] = o.objective;
    j["evaluations_used"] = o.evaluations_used;
    j["restarts"] = o.restarts;
    j["params"] = {{"dim", start ? start->dim() : params.dim},
                   {"slot_sizes", start ? start->slot_sizes() : params.slot_sizes},
                   {"seed", params.seed},
                   {"budget", params.budget},
                   {"residual_target", params.residual_target},
                   {"violation_floor", params.violation_floor},
                   {"lambda", params.lambda}};
    c.out << dump_json(j);
  } else {
    c.out << "found:              " << (o.found ? "yes" : "no (budget exhausted)") << "\n";
    c.out << "minimal residual:   " << format_number(o.minimal_residual) << "\n";
    c.out << "max weak violation: " << format_number(o.max_weak_violation) << "\n";
    c.out << "evaluations:        " << o.evaluations_used << "\n";
    c.out << "restarts:           " << o.restarts << "\n";
    if (!output.empty() && o.family) c.out << "wrote " << output << (o.found ? "" : " (best candidate)") << "\n";
  }
  return o.found ? kPass : kBudgetExhausted;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Consistency checks for quantum history families", "decohere"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DECOHERE_VERSION);

  std::string file;
  std::string level = "minimal";
  double tol_zero = Tolerance{}.eps_zero;
  bool as_json = false;
  std::string set_text;
  std::string output;
  std::uint64_t n = 100000;
  std::uint64_t seed = 0;
  std::string example_name;
  bool verify = false;
  SearchParams sp;
  std::string slots_text;
  std::string init;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", file, "Family file (JSON)")->required();
    sub->add_option("--tol", tol_zero, "Zero tolerance eps_zero")->check(CLI::PositiveNumber);
    sub->add_flag("--json", as_json, "Machine-readable JSON output");
  };

  auto* check = app.add_subcommand("check", "Check a decoherence condition");
  add_common(check);
  check->add_option("--level", level, "minimal, weak or medium")
      ->check(CLI::IsMember({"minimal", "weak", "medium"}));
  auto* probs = app.add_subcommand("probs", "Branch and final-state probabilities");
  add_common(probs);
  auto* lp = app.add_subcommand("lp", "Linearly positive values against chain probabilities");
  add_common(lp);
  auto* sumrule = app.add_subcommand("sumrule", "History sum rule for a set of branches");
  add_common(sumrule);
  sumrule->add_option("--set", set_text, "Branches as labels, e.g. \"1,3,6+2,4,6\"")->required();
  auto* graph = app.add_subcommand("graph", "Trajectory graph in DOT format");
  graph->add_option("file", file, "Family file (JSON)")->required();
  graph->add_option("-o,--output", output, "Output DOT file (default: stdout)");
  auto* sample = app.add_subcommand("sample", "Simulate sequential measurements");
  add_common(sample);
  sample->add_option("-n", n, "Number of runs");
  sample->add_option("--seed", seed, "Random seed");
  auto* example = app.add_subcommand("example", "Built-in example families");
  example->add_option("name", example_name, "Example name (paper)")->required();
  example->add_flag("--verify", verify, "Check every published value");
  example->add_option("-o,--output", output, "Write the family file");
  auto* search = app.add_subcommand("search", "Search for minimal but not weakly decoherent families");
  search->add_option("--dim", sp.dim, "Hilbert space dimension");
  search->add_option("--slots", slots_text, "Projectors per time, e.g. 2,3,3");
  search->add_option("--seed", sp.seed, "Random seed");
  search->add_option("--budget", sp.budget, "Maximum objective evaluations");
  search->add_option("--init", init, "Start from this family file");
  search->add_option("-o,--output", output, "Write the resulting family file");
  search->add_flag("--json", as_json, "Machine-readable JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  Tolerance tol;
  tol.eps_zero = tol_zero;
  try {
    tol.validate();
    if (*check) return cmd_check(ctx, file, level, tol, as_json);
    if (*probs) return cmd_probs(ctx, file, tol, as_json);
    if (*lp) return cmd_lp(ctx, file, tol, as_json);
    if (*sumrule) return cmd_sumrule(ctx, file, set_text, tol, as_json);
    if (*graph) return cmd_graph(ctx, file, output, tol);
    if (*sample) return cmd_sample(ctx, file, n, seed, tol, as_json);
    if (*example) return cmd_example(ctx, example_name, verify, output);
    if (*search) return cmd_search(ctx, sp, slots_text, init, output, as_json);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace decohere::cli
