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

#include "decohere/cli/family_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "decohere/errors.hpp"

namespace decohere::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Locating JSON pointers in source text

namespace {

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

  /// Raw text of a string token, quotes included.
  std::string_view string_token() {
    const std::size_t start = pos_++;
    while (pos_ < text_.size() && text_[pos_] != '"') pos_ += text_[pos_] == '\\' ? 2 : 1;
    ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void skip_value() {
    skip_ws();
    const char c = peek();
    if (c == '"') {
      string_token();
    } else if (c == '{' || c == '[') {
      const char close = c == '{' ? '}' : ']';
      advance();
      skip_ws();
      if (peek() == close) {
        advance();
        return;
      }
      while (pos_ < text_.size()) {
        if (c == '{') {
          skip_ws();
          string_token();
          skip_ws();
          advance();  // ':'
        }
        skip_value();
        skip_ws();
        if (peek() == ',') {
          advance();
          continue;
        }
        advance();  // close
        return;
      }
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos) ++pos_;
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string where_of(std::string_view text, const std::string& pointer) {
  const auto [line, col] = locate(text, pointer);
  if (line == 0) return {};
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

std::pair<std::size_t, std::size_t> locate(std::string_view text, std::string_view pointer) {
  std::vector<std::string> tokens;
  try {
    for (json::json_pointer p{std::string(pointer)}; !p.empty(); p = p.parent_pointer()) tokens.push_back(p.back());
    std::reverse(tokens.begin(), tokens.end());
  } catch (const json::exception&) {
    return {0, 0};
  }
  Scanner s(text);
  s.skip_ws();
  for (const auto& token : tokens) {
    s.skip_ws();
    if (s.peek() == '{') {
      s.advance();
      bool found = false;
      while (true) {
        s.skip_ws();
        if (s.peek() != '"') return {0, 0};
        std::string key;
        try {
          key = json::parse(s.string_token()).get<std::string>();
        } catch (const json::exception&) {
          return {0, 0};
        }
        s.skip_ws();
        s.advance();  // ':'
        s.skip_ws();
        if (key == token) {
          found = true;
          break;
        }
        s.skip_value();
        s.skip_ws();
        if (s.peek() != ',') return {0, 0};
        s.advance();
      }
      if (!found) return {0, 0};
    } else if (s.peek() == '[') {
      std::size_t index = 0;
      try {
        index = std::stoul(token);
      } catch (const std::exception&) {
        return {0, 0};
      }
      s.advance();
      for (std::size_t i = 0; i < index; ++i) {
        s.skip_ws();
        if (s.peek() == ']') return {0, 0};
        s.skip_value();
        s.skip_ws();
        if (s.peek() != ',') return {0, 0};
        s.advance();
      }
      s.skip_ws();
      if (s.peek() == ']') return {0, 0};
    } else {
      return {0, 0};
    }
  }
  s.skip_ws();
  return line_col(text, s.pos());
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw InputError(message, pointer, where_of(text_, pointer));
  }

  const json& member(const json& obj, const std::string& pointer, const char* key) const {
    if (!obj.contains(key)) fail(pointer, std::string("missing key \"") + key + "\"");
    return obj.at(key);
  }

  void only_keys(const json& obj, const std::string& pointer, std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        fail(pointer + "/" + key, "unknown key \"" + key + "\"");
      }
    }
  }

  const json& object(const json& j, const std::string& pointer) const {
    if (!j.is_object()) fail(pointer, "expected an object");
    return j;
  }

  const json& array(const json& j, const std::string& pointer, bool nonempty) const {
    if (!j.is_array()) fail(pointer, "expected an array");
    if (nonempty && j.empty()) fail(pointer, "expected a nonempty array");
    return j;
  }

  std::string string(const json& j, const std::string& pointer) const {
    if (!j.is_string()) fail(pointer, "expected a string");
    return j.get<std::string>();
  }

  double number(const json& j, const std::string& pointer) const {
    if (!j.is_number()) fail(pointer, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail(pointer, "number is not finite");
    return x;
  }

  Complex complex(const json& j, const std::string& pointer) const {
    if (!j.is_array() || j.size() != 2) fail(pointer, "expected a complex number [re, im]");
    return {number(j[0], pointer + "/0"), number(j[1], pointer + "/1")};
  }

  Vector vector(const json& j, const std::string& pointer, std::size_t dim) const {
    array(j, pointer, true);
    if (j.size() != dim) {
      fail(pointer, "vector has " + std::to_string(j.size()) + " entries, dimension is " + std::to_string(dim));
    }
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = complex(j[i], pointer + "/" + std::to_string(i));
    return v;
  }

 private:
  std::string_view text_;
};

std::string at(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

}  // namespace

HistoryFamily parse_family(std::string_view text, const Tolerance& tol) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw InputError("JSON syntax error: " + msg, "", std::to_string(line) + ":" + std::to_string(col));
  }
  const Reader r(text);
  r.object(doc, "");
  r.only_keys(doc, "", {"dimension", "initial", "times", "branches"});

  const json& dim_j = r.member(doc, "", "dimension");
  if (!dim_j.is_number_integer() || dim_j.get<long long>() < 1) r.fail("/dimension", "expected a positive integer");
  const auto dim = static_cast<std::size_t>(dim_j.get<long long>());

  const json& init = r.object(r.member(doc, "", "initial"), "/initial");
  const std::string kind = r.string(r.member(init, "/initial", "type"), "/initial/type");
  std::optional<StateDescriptor> state;
  if (kind == "pure") {
    r.only_keys(init, "/initial", {"type", "vector"});
    state = StateDescriptor::pure(r.vector(r.member(init, "/initial", "vector"), "/initial/vector", dim));
  } else if (kind == "mixed") {
    r.only_keys(init, "/initial", {"type", "matrix"});
    const json& rows = r.array(r.member(init, "/initial", "matrix"), "/initial/matrix", true);
    if (rows.size() != dim) r.fail("/initial/matrix", "matrix must have " + std::to_string(dim) + " rows");
    Matrix rho(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) rho.row(static_cast<Eigen::Index>(i)) = r.vector(rows[i], at("/initial/matrix", i), dim).transpose();
    state = StateDescriptor::mixed(rho);
  } else {
    r.fail("/initial/type", "type must be \"pure\" or \"mixed\"");
  }

  const json& times_j = r.array(r.member(doc, "", "times"), "/times", true);
  std::vector<TimeSlot> times;
  for (std::size_t t = 0; t < times_j.size(); ++t) {
    const std::string tp = at("/times", t);
    const json& time = r.object(times_j[t], tp);
    r.only_keys(time, tp, {"label", "slots"});
    const std::string label = r.string(r.member(time, tp, "label"), tp + "/label");
    const json& slots = r.array(r.member(time, tp, "slots"), tp + "/slots", true);
    std::vector<Projector> projectors;
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const std::string sp = at(tp + "/slots", s);
      const json& slot = r.object(slots[s], sp);
      r.only_keys(slot, sp, {"label", "vectors"});
      labels.push_back(r.string(r.member(slot, sp, "label"), sp + "/label"));
      const json& vs = r.array(r.member(slot, sp, "vectors"), sp + "/vectors", true);
      std::vector<Vector> vectors;
      for (std::size_t k = 0; k < vs.size(); ++k) vectors.push_back(r.vector(vs[k], at(sp + "/vectors", k), dim));
      try {
        projectors.push_back(projector_from_vectors(vectors, tol));
      } catch (const Error& e) {
        r.fail(sp + "/vectors", e.what());
      }
    }
    try {
      times.emplace_back(label, std::move(projectors), std::move(labels));
    } catch (const Error& e) {
      r.fail(tp, e.what());
    }
  }

  std::optional<std::vector<Branch>> branches;
  if (doc.contains("branches")) {
    const json& b = doc.at("branches");
    if (b.is_string()) {
      if (b.get<std::string>() != "all") r.fail("/branches", "expected \"all\" or a list of branches");
    } else {
      r.array(b, "/branches", false);
      branches.emplace();
      for (std::size_t i = 0; i < b.size(); ++i) {
        const std::string bp = at("/branches", i);
        r.array(b[i], bp, true);
        if (b[i].size() != times.size()) {
          r.fail(bp, "branch has " + std::to_string(b[i].size()) + " labels, family has " +
                         std::to_string(times.size()) + " times");
        }
        Branch h;
        for (std::size_t t = 0; t < times.size(); ++t) {
          const std::string label = r.string(b[i][t], at(bp, t));
          const auto& labels = times[t].projector_labels();
          const auto it = std::find(labels.begin(), labels.end(), label);
          if (it == labels.end()) r.fail(at(bp, t), "no projector labelled \"" + label + "\" at time '" + times[t].label() + "'");
          h.indices.push_back(static_cast<std::size_t>(it - labels.begin()));
        }
        branches->push_back(std::move(h));
      }
    }
  }

  std::optional<HistoryFamily> family;
  try {
    family.emplace(std::move(*state), std::move(times), std::move(branches));
  } catch (const Error& e) {
    const std::string p = e.code() == ErrorCode::InvalidBranch ? "/branches" : "";
    r.fail(p, e.what());
  }

  const auto report = validate_family(*family, tol);
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const auto& c = report.checks[i];
    if (c.pass) continue;
    // Checks come in order: initial state, one per time, excluded branches.
    std::string p = "/branches";
    if (i == 0) p = "/initial";
    else if (i <= family->num_times()) p = at("/times", i - 1);
    if (p == "/branches" && !doc.contains("branches")) p = "";
    r.fail(p, c.name + ": " + c.detail);
  }
  return std::move(*family);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v[i]));
  return out;
}

}  // namespace

json family_to_json(const HistoryFamily& f) {
  json doc;
  doc["dimension"] = f.dim();
  if (f.initial().is_pure()) {
    doc["initial"] = {{"type", "pure"}, {"vector", vector_json(f.initial().vector())}};
  } else {
    json rows = json::array();
    const Matrix& rho = f.initial().density();
    for (Eigen::Index i = 0; i < rho.rows(); ++i) rows.push_back(vector_json(rho.row(i).transpose()));
    doc["initial"] = {{"type", "mixed"}, {"matrix", rows}};
  }
  json times = json::array();
  for (const auto& slot : f.times()) {
    json slots = json::array();
    for (std::size_t j = 0; j < slot.size(); ++j) {
      json vectors = json::array();
      for (const auto& v : range_basis(slot[j])) vectors.push_back(vector_json(v));
      slots.push_back({{"label", slot.projector_labels()[j]}, {"vectors", vectors}});
    }
    times.push_back({{"label", slot.label()}, {"slots", slots}});
  }
  doc["times"] = times;
  if (f.has_all_branches()) {
    doc["branches"] = "all";
  } else {
    json branches = json::array();
    for (const auto& h : *f.explicit_branches()) {
      json labels = json::array();
      for (std::size_t t = 0; t < h.size(); ++t) labels.push_back(f.times()[t].projector_labels()[h[t]]);
      branches.push_back(labels);
    }
    doc["branches"] = branches;
  }
  return doc;
}

Branch branch_from_labels(const HistoryFamily& f, const std::vector<std::string>& labels) {
  if (labels.size() != f.num_times()) {
    throw InputError("branch needs " + std::to_string(f.num_times()) + " labels, got " + std::to_string(labels.size()));
  }
  Branch h;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto& all = f.times()[t].projector_labels();
    const auto it = std::find(all.begin(), all.end(), labels[t]);
    if (it == all.end()) {
      throw InputError("no projector labelled \"" + labels[t] + "\" at time '" + f.times()[t].label() + "'");
    }
    h.indices.push_back(static_cast<std::size_t>(it - all.begin()));
  }
  return h;
}

}  // namespace decohere::cli
