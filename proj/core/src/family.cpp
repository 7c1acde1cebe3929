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

#include "decohere/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "decohere/errors.hpp"
#include "decohere/random.hpp"

namespace decohere {

// ---------------------------------------------------------------------------
// StateDescriptor

StateDescriptor StateDescriptor::pure(Vector psi) {
  if (psi.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty state vector");
  if (!psi.allFinite()) throw Error(ErrorCode::NonFinite, "state vector has non-finite entries");
  Matrix rho = psi * psi.adjoint();
  Matrix factor = psi;
  return StateDescriptor(Kind::pure, std::move(psi), std::move(rho), std::move(factor));
}

StateDescriptor StateDescriptor::mixed(Matrix rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "density matrix must be non-empty and square");
  }
  if (!rho.allFinite()) throw Error(ErrorCode::NonFinite, "density matrix has non-finite entries");
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] > 0.0) keep.push_back(i);
  }
  Matrix factor = Matrix::Zero(rho.rows(), std::max<Eigen::Index>(1, static_cast<Eigen::Index>(keep.size())));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    factor.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()[keep[c]]);
  }
  return StateDescriptor(Kind::mixed, Vector(), std::move(rho), std::move(factor));
}

std::size_t StateDescriptor::dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }

std::vector<std::string> StateDescriptor::violations(const Tolerance& tol) const {
  std::vector<std::string> out;
  std::ostringstream os;
  if (kind_ == Kind::pure) {
    const double n = psi_.norm();
    if (std::abs(n - 1.0) > tol.eps_zero) {
      os << "pure state norm " << n << " differs from 1";
      out.push_back(os.str());
    }
    return out;
  }
  const double herm = max_abs(rho_ - rho_.adjoint());
  if (herm > tol.eps_zero) {
    os << "density matrix not Hermitian (defect " << herm << ")";
    out.push_back(os.str());
    os.str("");
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (rho_ + rho_.adjoint()),
                                                               Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -tol.eps_zero) {
    os << "density matrix has negative eigenvalue " << min_eig;
    out.push_back(os.str());
    os.str("");
  }
  const Complex tr = rho_.trace();
  if (std::abs(tr - 1.0) > tol.eps_zero) {
    os << "density matrix trace " << tr << " differs from 1";
    out.push_back(os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// TimeSlot

TimeSlot::TimeSlot(std::string label, std::vector<Projector> projectors,
                   std::vector<std::string> projector_labels)
    : label_(std::move(label)), projectors_(std::move(projectors)), labels_(std::move(projector_labels)) {
  if (projectors_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "time slot '" + label_ + "' has no projectors");
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < projectors_.size(); ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != projectors_.size()) {
    throw Error(ErrorCode::InvalidArgument, "time slot '" + label_ + "': label count differs from projector count");
  }
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) {
    throw Error(ErrorCode::InvalidArgument, "time slot '" + label_ + "' has duplicate projector labels");
  }
  for (const auto& p : projectors_) {
    if (p.dim() != projectors_.front().dim()) {
      throw Error(ErrorCode::DimensionMismatch, "time slot '" + label_ + "' mixes projector dimensions");
    }
  }
}

Matrix TimeSlot::total() const {
  Matrix sum = Matrix::Zero(projectors_.front().matrix().rows(), projectors_.front().matrix().cols());
  for (const auto& p : projectors_) sum += p.matrix();
  return sum;
}

bool TimeSlot::complete(const Tolerance& tol) const {
  const Matrix sum = total();
  return max_abs(sum - Matrix::Identity(sum.rows(), sum.cols())) <= tol.eps_zero;
}

std::vector<std::string> TimeSlot::violations(const Tolerance& tol) const {
  std::vector<std::string> out;
  for (std::size_t a = 0; a < projectors_.size(); ++a) {
    for (std::size_t b = a + 1; b < projectors_.size(); ++b) {
      const double overlap = max_abs(projectors_[a].matrix() * projectors_[b].matrix());
      if (overlap > tol.eps_zero) {
        std::ostringstream os;
        os << "NotOrthogonal: projectors '" << labels_[a] << "' and '" << labels_[b]
           << "' have max |P_a P_b| = " << overlap;
        out.push_back(os.str());
      }
    }
  }
  const Matrix sum = total();
  const double idem = max_abs(sum * sum - sum);
  if (idem > tol.eps_zero) {
    std::ostringstream os;
    os << "NotProjector: slot sum is not idempotent (defect " << idem << ")";
    out.push_back(os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// HistoryFamily

HistoryFamily::HistoryFamily(StateDescriptor initial, std::vector<TimeSlot> times,
                             std::optional<std::vector<Branch>> branches)
    : dim_(initial.dim()), initial_(std::move(initial)), times_(std::move(times)), explicit_(std::move(branches)) {
  if (times_.empty()) throw Error(ErrorCode::InvalidArgument, "a family needs at least one time");
  for (const auto& slot : times_) {
    if (slot.projectors().front().dim() != dim_) {
      std::ostringstream os;
      os << "time '" << slot.label() << "' has projectors of dimension " << slot.projectors().front().dim()
         << " but the state has dimension " << dim_;
      throw Error(ErrorCode::DimensionMismatch, os.str());
    }
  }
  if (explicit_) {
    std::set<Branch> seen;
    for (const auto& h : *explicit_) {
      require_valid(h);
      if (!seen.insert(h).second) {
        throw Error(ErrorCode::InvalidBranch, "branch " + branch_name(h) + " is listed twice");
      }
    }
  }
}

std::vector<std::size_t> HistoryFamily::slot_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(times_.size());
  for (const auto& s : times_) sizes.push_back(s.size());
  return sizes;
}

std::size_t HistoryFamily::product_size() const noexcept {
  std::size_t n = 1;
  for (const auto& s : times_) {
    if (n > std::numeric_limits<std::size_t>::max() / s.size()) return std::numeric_limits<std::size_t>::max();
    n *= s.size();
  }
  return n;
}

std::size_t HistoryFamily::num_branches() const noexcept {
  return explicit_ ? explicit_->size() : product_size();
}

std::vector<Branch> HistoryFamily::branches(std::size_t cap) const {
  if (explicit_) return *explicit_;
  const std::size_t n = product_size();
  if (n > cap) {
    std::ostringstream os;
    os << "family has " << n << " product branches, cap is " << cap;
    throw Error(ErrorCode::TooManyBranches, os.str());
  }
  std::vector<Branch> out;
  out.reserve(n);
  const auto sizes = slot_sizes();
  for_each_product_branch(sizes, [&](const Branch& h) { out.push_back(h); });
  return out;
}

bool HistoryFamily::is_valid_branch(const Branch& h) const noexcept {
  if (h.size() != times_.size()) return false;
  for (std::size_t t = 0; t < h.size(); ++t) {
    if (h.indices[t] >= times_[t].size()) return false;
  }
  return true;
}

void HistoryFamily::require_valid(const Branch& h) const {
  if (is_valid_branch(h)) return;
  std::ostringstream os;
  os << "branch (";
  for (std::size_t t = 0; t < h.size(); ++t) os << (t ? "," : "") << h.indices[t];
  os << ") does not fit a family with slot sizes (";
  for (std::size_t t = 0; t < times_.size(); ++t) os << (t ? "," : "") << times_[t].size();
  os << ")";
  throw Error(ErrorCode::InvalidBranch, os.str());
}

bool HistoryFamily::lists(const Branch& h) const {
  if (!explicit_) return is_valid_branch(h);
  return std::find(explicit_->begin(), explicit_->end(), h) != explicit_->end();
}

std::string HistoryFamily::branch_name(const Branch& h) const {
  std::string out;
  for (std::size_t t = 0; t < h.size(); ++t) {
    if (t) out += '>';
    if (t < times_.size() && h.indices[t] < times_[t].size()) {
      out += times_[t].projector_labels()[h.indices[t]];
    } else {
      out += '?';
    }
  }
  return out;
}

void for_each_product_branch(std::span<const std::size_t> sizes,
                             const std::function<void(const Branch&)>& fn) {
  for (auto s : sizes) {
    if (s == 0) return;
  }
  Branch h{std::vector<std::size_t>(sizes.size(), 0)};
  while (true) {
    fn(h);
    std::size_t t = sizes.size();
    while (t > 0) {
      --t;
      if (++h.indices[t] < sizes[t]) break;
      h.indices[t] = 0;
      if (t == 0) return;
    }
    if (sizes.empty()) return;
  }
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::vector<ValidationCheck> ValidationReport::failures() const {
  std::vector<ValidationCheck> out;
  std::copy_if(checks.begin(), checks.end(), std::back_inserter(out), [](const auto& c) { return !c.pass; });
  return out;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

ValidationReport validate_family(const HistoryFamily& f, const Tolerance& tol) {
  ValidationReport report;
  {
    const auto v = f.initial().violations(tol);
    report.checks.push_back({"initial state", v.empty(), join(v)});
  }
  for (const auto& slot : f.times()) {
    const auto v = slot.violations(tol);
    report.checks.push_back({"time '" + slot.label() + "'", v.empty(), join(v)});
  }

  ValidationCheck excl{"excluded branches", true, ""};
  if (f.explicit_branches()) {
    const std::size_t n = f.product_size();
    if (n > kDefaultBranchCap) {
      excl.pass = false;
      excl.detail = "product has too many branches to verify exclusions";
    } else {
      std::vector<Branch> missing;
      const auto sizes = f.slot_sizes();
      const std::set<Branch> listed(f.explicit_branches()->begin(), f.explicit_branches()->end());
      for_each_product_branch(sizes, [&](const Branch& h) {
        if (!listed.count(h)) missing.push_back(h);
      });
      const auto images = chain_images(f, missing);
      std::vector<std::string> bad;
      for (std::size_t i = 0; i < missing.size(); ++i) {
        const double p = images[i].squaredNorm();
        if (p > tol.eps_prob) {
          std::ostringstream os;
          os << f.branch_name(missing[i]) << " has probability " << p;
          bad.push_back(os.str());
        }
      }
      excl.pass = bad.empty();
      std::ostringstream os;
      os << missing.size() << " excluded";
      if (!bad.empty()) os << "; " << join(bad);
      excl.detail = os.str();
    }
  } else {
    excl.detail = "all product branches listed";
  }
  report.checks.push_back(std::move(excl));
  return report;
}

// ---------------------------------------------------------------------------
// Chain operators and the decoherence functional

Matrix chain_operator(const HistoryFamily& f, const Branch& h) {
  f.require_valid(h);
  const auto n = static_cast<Eigen::Index>(f.dim());
  Matrix c = Matrix::Identity(n, n);
  for (std::size_t t = 0; t < h.size(); ++t) c = f.times()[t][h.indices[t]].matrix() * c;
  return c;
}

Complex decoherence_functional(const HistoryFamily& f, const Branch& h, const Branch& h2) {
  const Matrix c1 = chain_operator(f, h);
  const Matrix c2 = chain_operator(f, h2);
  return (c1 * f.initial().density() * c2.adjoint()).trace();
}

double probability(const HistoryFamily& f, const Branch& h, const Tolerance& tol) {
  const Complex d = decoherence_functional(f, h, h);
  if (std::abs(d.imag()) > tol.eps_prob || d.real() < -tol.eps_prob) {
    std::ostringstream os;
    os << "probability of " << f.branch_name(h) << " evaluates to " << d;
    throw Error(ErrorCode::InvariantViolation, os.str());
  }
  return d.real();
}

double clamp_probability(double p, const Tolerance& tol) {
  if (p < 0.0 && p >= -tol.eps_prob) return 0.0;
  if (p > 1.0 && p <= 1.0 + tol.eps_prob) return 1.0;
  return p;
}

std::vector<Matrix> chain_images(const HistoryFamily& f, std::span<const Branch> hs) {
  std::vector<Matrix> out;
  out.reserve(hs.size());
  for (const auto& h : hs) {
    f.require_valid(h);
    Matrix m = f.initial().factor();
    for (std::size_t t = 0; t < h.size(); ++t) m = f.times()[t][h.indices[t]].matrix() * m;
    out.push_back(std::move(m));
  }
  return out;
}

Complex image_overlap(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array().conjugate()).sum();
}

std::vector<std::string> DecoherenceMatrix::violations(const Tolerance& tol) const {
  std::vector<std::string> out;
  std::ostringstream os;
  const double herm = max_abs(entries - entries.adjoint());
  if (herm > tol.eps_zero) {
    os << "not Hermitian (defect " << herm << ")";
    out.push_back(os.str());
    os.str("");
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    const Complex d = entries(i, i);
    if (std::abs(d.imag()) > tol.eps_zero || d.real() < -tol.eps_prob) {
      os << "diagonal entry " << i << " = " << d;
      out.push_back(os.str());
      os.str("");
    }
  }
  const double lo = min_eigenvalue();
  if (lo < -tol.eps_zero) {
    os << "not positive semidefinite (min eigenvalue " << lo << ")";
    out.push_back(os.str());
  }
  return out;
}

double DecoherenceMatrix::min_eigenvalue() const {
  if (entries.size() == 0) return 0.0;
  const Matrix herm = 0.5 * (entries + entries.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

DecoherenceMatrix decoherence_matrix(const HistoryFamily& f, std::size_t cap) {
  DecoherenceMatrix dm;
  dm.branches = f.branches(cap);
  const auto images = chain_images(f, dm.branches);
  const auto n = static_cast<Eigen::Index>(dm.branches.size());
  dm.entries.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      dm.entries(a, b) = image_overlap(images[static_cast<std::size_t>(a)], images[static_cast<std::size_t>(b)]);
    }
  }
  return dm;
}

std::map<std::size_t, double> final_state_probabilities(const HistoryFamily& f) {
  std::map<std::size_t, double> out;
  const auto& last = f.times().back();
  for (std::size_t a = 0; a < last.size(); ++a) {
    out[a] = (last[a].matrix() * f.initial().factor()).squaredNorm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sequential-measurement sampling

namespace {

// Lazily expanded outcome tree. Each node holds the normalized post-measurement
// factor for its prefix and the cumulative outcome probabilities at the next time.
struct SampleNode {
  Matrix state;
  std::vector<double> cumulative;
  std::vector<std::unique_ptr<SampleNode>> children;
  bool expanded = false;
};

void expand(SampleNode& node, const TimeSlot& slot, const Tolerance& tol) {
  node.cumulative.resize(slot.size());
  node.children.resize(slot.size());
  double acc = 0.0;
  std::vector<Matrix> projected(slot.size());
  for (std::size_t a = 0; a < slot.size(); ++a) {
    projected[a] = slot[a].matrix() * node.state;
    acc += projected[a].squaredNorm();
    node.cumulative[a] = acc;
  }
  // A complete slot cannot lose probability; renormalize away rounding and
  // pin everything from the last reachable outcome onward to exactly 1.
  if (slot.complete(tol) && acc > 0.0) {
    std::size_t last = 0;
    for (std::size_t a = 0; a < slot.size(); ++a) {
      node.cumulative[a] /= acc;
      if (projected[a].squaredNorm() > 0.0) last = a;
    }
    for (std::size_t a = last; a < slot.size(); ++a) node.cumulative[a] = 1.0;
  }
  for (std::size_t a = 0; a < slot.size(); ++a) {
    const double w = projected[a].norm();
    if (w > 0.0) {
      node.children[a] = std::make_unique<SampleNode>();
      node.children[a]->state = projected[a] / w;
    }
  }
  node.expanded = true;
}

}  // namespace

SampleCounts sample_branches(const HistoryFamily& f, std::uint64_t n, std::uint64_t seed) {
  const Tolerance tol;
  SampleCounts out;
  out.total = n;
  CounterRng rng(seed);
  SampleNode root;
  const Matrix& factor = f.initial().factor();
  root.state = factor / factor.norm();
  const std::size_t times = f.num_times();
  Branch h{std::vector<std::size_t>(times, 0)};
  std::set<Branch> listed;
  if (f.explicit_branches()) listed.insert(f.explicit_branches()->begin(), f.explicit_branches()->end());

  for (std::uint64_t run = 0; run < n; ++run) {
    SampleNode* node = &root;
    bool lost = false;
    for (std::size_t t = 0; t < times; ++t) {
      // Draw before inspecting the node so every run consumes `times` draws.
      const double u = rng.uniform();
      if (lost) continue;
      if (!node->expanded) expand(*node, f.times()[t], tol);
      const auto it = std::upper_bound(node->cumulative.begin(), node->cumulative.end(), u);
      if (it == node->cumulative.end()) {
        lost = true;
        continue;
      }
      const auto a = static_cast<std::size_t>(it - node->cumulative.begin());
      h.indices[t] = a;
      node = node->children[a].get();
    }
    if (lost || (f.explicit_branches() && !listed.count(h))) {
      ++out.out_of_family;
    } else {
      ++out.counts[h];
    }
  }
  return out;
}

}  // namespace decohere
