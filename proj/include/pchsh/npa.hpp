// Copyright 2026 The pchsh Authors
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

// Level-2 NPA relaxation of the guessing-probability problem for the
// tripartite parity-CHSH scenario, with an alternating-projection
// feasibility solver and bisection on the objective.
//
// Operators: Alice E_0, E_1 (projector on outcome +1 of A_x), Bob F_0, F_1,
// Charlie G. Outcome -1 is the complement I - E. Moments are kept real: every
// constraint has real coefficients, so the real part of any feasible
// Hermitian moment matrix is itself feasible with the same objective, and
// <w> may be identified with <w^dagger>.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pchsh/errors.hpp"
#include "pchsh/linalg.hpp"
#include "pchsh/randomness.hpp"

namespace pchsh::npa {

/// Letters of the operator alphabet.
enum Letter : std::uint8_t { kE0 = 0, kE1 = 1, kF0 = 2, kF1 = 3, kG = 4 };
inline constexpr int kNumLetters = 5;

using Word = std::vector<std::uint8_t>;

inline int party_of(std::uint8_t letter) {
  return letter < 2 ? 0 : (letter < 4 ? 1 : 2);
}

inline std::string to_string(const Word& w) {
  static constexpr std::array<const char*, kNumLetters> names{"E0", "E1", "F0",
                                                             "F1", "G"};
  if (w.empty()) return "1";
  std::string s;
  for (auto l : w) s += names[l];
  return s;
}

/// Moves letters of different parties past each other (they commute), keeping
/// each party's relative order, then collapses immediate repeats (E E = E).
inline Word reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int party = 0; party < 3; ++party) {
    const std::size_t start = out.size();
    for (auto l : w) {
      if (party_of(l) != party) continue;
      if (out.size() > start && out.back() == l) continue;
      out.push_back(l);
    }
  }
  return out;
}

inline Word adjoint(const Word& w) { return Word(w.rbegin(), w.rend()); }

/// Label of the real moment variable <w>: w and w^dagger share a label.
inline Word moment_key(const Word& w) {
  Word a = reduce(w);
  Word b = reduce(adjoint(w));
  return std::min(a, b);
}

/// Reduced words of length <= 2, starting with the empty word.
inline std::vector<Word> level2_basis() {
  std::vector<Word> basis{Word{}};
  auto add = [&](Word w) {
    w = reduce(w);
    if (std::find(basis.begin(), basis.end(), w) == basis.end())
      basis.push_back(std::move(w));
  };
  for (std::uint8_t a = 0; a < kNumLetters; ++a) add({a});
  for (std::uint8_t a = 0; a < kNumLetters; ++a)
    for (std::uint8_t b = 0; b < kNumLetters; ++b)
      if (a != b) add({a, b});
  return basis;
}

/// A linear functional over moment variables: sum coeff * y[var].
using LinearForm = std::map<int, double>;

/// Outcome/setting label of one joint probability P(abc|xy, z=0).
struct Outcome {
  int a = 1, b = 1, c = 1, x = 0, y = 0;
};

/// All 32 labels, ordered with a, b, c in {+1, -1} (plus first) and x, y in
/// {0, 1}.
inline std::vector<Outcome> all_outcomes() {
  std::vector<Outcome> out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a : {1, -1})
        for (int b : {1, -1})
          for (int c : {1, -1}) out.push_back({a, b, c, x, y});
  return out;
}

/// Coefficients alpha_{abc|xy} with sum alpha * P = <A1 B- C0> + <A0 B+>.
inline std::vector<std::pair<Outcome, double>> bell_coefficients() {
  std::vector<std::pair<Outcome, double>> out;
  for (const auto& o : all_outcomes()) {
    double alpha;
    if (o.x == 1)
      alpha = o.a * o.b * o.c * (o.y == 0 ? 1.0 : -1.0) / 2.0;
    else
      alpha = o.a * o.b / 2.0;
    out.emplace_back(o, alpha);
  }
  return out;
}

/// sum alpha * P over a distribution.
inline double bell_from_distribution(const JointDistribution& dist) {
  double s = 0.0;
  for (const auto& [o, alpha] : bell_coefficients())
    s += alpha * dist(o.a, o.b, o.c, o.x, o.y);
  return s;
}

/// The moment-matrix structure: basis, variable classes and the map from
/// probabilities to moments. Built once; shared by all problems.
class MomentStructure {
 public:
  MomentStructure() : basis_(level2_basis()) {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    var_of_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        Word w = adjoint(basis_[static_cast<std::size_t>(i)]);
        const auto& v = basis_[static_cast<std::size_t>(j)];
        w.insert(w.end(), v.begin(), v.end());
        const Word key = moment_key(w);
        auto it = index_.find(key);
        if (it == index_.end()) {
          it = index_.emplace(key, static_cast<int>(keys_.size())).first;
          keys_.push_back(key);
          class_size_.push_back(0);
        }
        var_of_(i, j) = it->second;
        ++class_size_[static_cast<std::size_t>(it->second)];
      }
    }
  }

  const std::vector<Word>& basis() const { return basis_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(basis_.size()); }
  int num_variables() const { return static_cast<int>(keys_.size()); }
  const std::vector<Word>& variables() const { return keys_; }
  int variable_at(Eigen::Index i, Eigen::Index j) const { return var_of_(i, j); }
  int class_size(int var) const {
    return class_size_[static_cast<std::size_t>(var)];
  }

  /// Variable index of <w>, if <w> appears in the moment matrix.
  std::optional<int> find(const Word& w) const {
    auto it = index_.find(moment_key(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// P(abc|xy) as a linear form: product of E or (I - E) per party.
  LinearForm probability(const Outcome& o) const {
    LinearForm form;
    const std::array<std::uint8_t, 3> letters{
        static_cast<std::uint8_t>(kE0 + o.x),
        static_cast<std::uint8_t>(kF0 + o.y), kG};
    const std::array<int, 3> signs{o.a, o.b, o.c};
    // Each party contributes either I (only for outcome -1) or +-E.
    for (int mask = 0; mask < 8; ++mask) {
      double coeff = 1.0;
      Word w;
      bool skip = false;
      for (int p = 0; p < 3; ++p) {
        const bool use_e = (mask >> p) & 1;
        if (use_e) {
          w.push_back(letters[static_cast<std::size_t>(p)]);
          if (signs[static_cast<std::size_t>(p)] < 0) coeff = -coeff;
        } else if (signs[static_cast<std::size_t>(p)] > 0) {
          skip = true;
        }
      }
      if (skip) continue;
      const auto var = find(w);
      if (!var) throw NumericalConsistency("npa: moment " + to_string(w) +
                                           " missing from level-2 matrix");
      form[*var] += coeff;
    }
    return form;
  }

  /// sum alpha P as a linear form.
  LinearForm bell_form() const {
    LinearForm form;
    for (const auto& [o, alpha] : bell_coefficients())
      for (const auto& [var, c] : probability(o)) form[var] += alpha * c;
    for (auto it = form.begin(); it != form.end();) {
      if (std::abs(it->second) < 1e-15)
        it = form.erase(it);
      else
        ++it;
    }
    return form;
  }

  /// Matrix with Gamma(i, j) = y[var(i, j)].
  RMatrix assemble(const Eigen::VectorXd& y) const {
    const Eigen::Index n = size();
    RMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = y(var_of_(i, j));
    return g;
  }

  /// Class-wise averages of `g` (the unconstrained Frobenius projection onto
  /// structured matrices, in variable coordinates).
  Eigen::VectorXd class_means(const RMatrix& g) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(num_variables());
    const Eigen::Index n = size();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) y(var_of_(i, j)) += g(i, j);
    for (int v = 0; v < num_variables(); ++v) y(v) /= class_size(v);
    return y;
  }

  /// Moment vector of a real quantum strategy, given a callable returning
  /// <w> (real part) for reduced words.
  template <typename MomentFn>
  Eigen::VectorXd moments_from(MomentFn&& moment) const {
    Eigen::VectorXd y(num_variables());
    for (int v = 0; v < num_variables(); ++v)
      y(v) = moment(keys_[static_cast<std::size_t>(v)]);
    return y;
  }

 private:
  std::vector<Word> basis_;
  std::vector<Word> keys_;
  std::vector<int> class_size_;
  std::map<Word, int> index_;
  Eigen::MatrixXi var_of_;
};

/// Moment vector of the projective strategy (rho, f): <w> is the real part of
/// Tr(rho W), W the product of the outcome +1 projectors named by w.
inline Eigen::VectorXd strategy_moments(const MomentStructure& s,
                                        const DensityMatrix& rho,
                                        const MeasurementFrame& f) {
  if (rho.num_qubits() != 3)
    throw InvalidInput("strategy_moments: expects a 3-qubit state");
  const Projectors pr = projectors(f);
  const CMatrix id = CMatrix::Identity(2, 2);
  auto on = [&](int party, const CMatrix& m) {
    std::array<CMatrix, 3> f3{id, id, id};
    f3[static_cast<std::size_t>(party)] = m;
    return CMatrix(kron(kron(f3[0], f3[1]), f3[2]));
  };
  const std::array<CMatrix, kNumLetters> ops{
      on(0, pr.alice[0][0]), on(0, pr.alice[1][0]), on(1, pr.bob[0][0]),
      on(1, pr.bob[1][0]), on(2, pr.charlie[0])};
  return s.moments_from([&](const Word& w) {
    CMatrix m = CMatrix::Identity(8, 8);
    for (auto l : w) m = m * ops[l];
    return rho.expectation(m).real();
  });
}

/// Maximize P(target) subject to Gamma PSD, Gamma(0,0) = 1 and
/// Bell functional = bell_value.
class MomentProblem {
 public:
  MomentProblem(const MomentStructure& structure, Outcome target,
                double bell_value)
      : structure_(&structure), target_(target), bell_value_(bell_value) {
    if (!std::isfinite(bell_value) || std::abs(bell_value) > std::sqrt(2.0) + 1e-12) {
      std::ostringstream os;
      os << "npa: Bell value " << bell_value
         << " exceeds the quantum maximum sqrt(2); infeasible by construction";
      throw InvalidInput(os.str());
    }
    objective_ = structure.probability(target);
    bell_ = structure.bell_form();
    const int nv = structure.num_variables();
    // Constraint rows: normalization, Bell value, objective.
    constraints_ = RMatrix::Zero(3, nv);
    const auto one = structure.find(Word{});
    constraints_(0, *one) = 1.0;
    for (const auto& [v, c] : bell_) constraints_(1, v) = c;
    for (const auto& [v, c] : objective_) constraints_(2, v) = c;
    weights_inv_.resize(nv);
    for (int v = 0; v < nv; ++v) weights_inv_(v) = 1.0 / structure.class_size(v);
    const RMatrix cnc =
        constraints_ * weights_inv_.asDiagonal() * constraints_.transpose();
    gram_ldlt_ = cnc.ldlt();
  }

  const MomentStructure& structure() const { return *structure_; }
  const Outcome& target() const { return target_; }
  double bell_value() const { return bell_value_; }
  const LinearForm& objective() const { return objective_; }
  const LinearForm& bell() const { return bell_; }
  /// Rows: normalization, Bell value, objective.
  const RMatrix& constraints() const { return constraints_; }

  static double evaluate(const LinearForm& f, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (const auto& [v, c] : f) s += c * y(v);
    return s;
  }

  /// Frobenius projection of `g` onto {structured Gamma : Gamma(0,0) = 1,
  /// Bell = bell_value, objective = objective_value}, in variable coordinates.
  Eigen::VectorXd project_affine(const RMatrix& g,
                                 double objective_value) const {
    Eigen::VectorXd y = structure_->class_means(g);
    const Eigen::Vector3d rhs(1.0, bell_value_, objective_value);
    const Eigen::Vector3d viol = constraints_ * y - rhs;
    const Eigen::VectorXd lambda = gram_ldlt_.solve(viol);
    y -= weights_inv_.asDiagonal() * (constraints_.transpose() * lambda);
    return y;
  }

 private:
  const MomentStructure* structure_;
  Outcome target_;
  double bell_value_;
  LinearForm objective_;
  LinearForm bell_;
  RMatrix constraints_;
  Eigen::VectorXd weights_inv_;
  Eigen::LDLT<RMatrix> gram_ldlt_;
};

/// Eigenvalue clamp onto the PSD cone.
inline RMatrix project_psd(const RMatrix& g, RMatrix* basis = nullptr) {
  const auto eig = jacobi_eigen(g, JacobiOptions{1e-13, 100}, basis);
  if (basis != nullptr) *basis = eig.vectors;
  const Eigen::VectorXd clamped = eig.values.cwiseMax(0.0);
  return eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
}


enum class Feasibility { kFeasible, kInfeasible, kInconclusive };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::kFeasible: return "feasible";
    case Feasibility::kInfeasible: return "infeasible";
    case Feasibility::kInconclusive: return "inconclusive";
  }
  return "?";
}

struct SolverOptions {
  /// Declared feasible once the affine and PSD iterates are this close.
  double tol = 1e-7;
  int max_iters = 20000;
  /// Declared infeasible when the residual stays above 10 * tol and moves by
  /// less than stagnation_rel_change (relative) over this many iterations.
  int stagnation_window = 500;
  double stagnation_rel_change = 1e-9;
  /// Anderson acceleration depth on the projection map; 0 gives plain
  /// alternating projections.
  int anderson_memory = 10;
  /// Iterations between attempts to build an infeasibility certificate.
  int certificate_interval = 25;
};

struct FeasibilityReport {
  Feasibility status = Feasibility::kInconclusive;
  /// Infeasibility backed by a separating PSD certificate (see
  /// infeasibility_margin), not only by stagnation.
  bool certified = false;
  double residual = 0.0;
  int iterations = 0;
  /// Final PSD iterate.
  RMatrix gamma;
};

/// Checks whether W = `w` (PSD) separates the PSD cone from the affine set.
///
/// For every feasible Gamma, 0 <= <W, Gamma> = sum_v s_v y_v where s are the
/// class sums of W. Writing s = C^T mu + r with C the constraint rows and d
/// their right-hand side gives <W, Gamma> <= mu^T d + sum |r_v|, because
/// every entry of a feasible moment matrix lies in [-1, 1] (for a basis word
/// w = u v, Gamma(w, w) = Gamma(v, w) and the 2x2 minor on {v, w} gives
/// Gamma(w, w) <= Gamma(v, v) = <v> <= 1). A negative
/// return value therefore proves infeasibility.
inline double infeasibility_margin(const MomentStructure& s, const RMatrix& c,
                                   const Eigen::Vector3d& d, const RMatrix& w) {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(s.num_variables());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = 0; j < s.size(); ++j)
      sums(s.variable_at(i, j)) += w(i, j);
  const Eigen::VectorXd mu = c.transpose().colPivHouseholderQr().solve(sums);
  const Eigen::VectorXd r = sums - c.transpose() * mu;
  return mu.dot(d) + r.lpNorm<1>();
}

/// Alternating projections between the affine constraint set (with the
/// objective pinned to `objective_value`) and the PSD cone, accelerated with
/// Anderson mixing of the composite projection map.
inline FeasibilityReport solve_feasibility(const MomentProblem& problem,
                                           double objective_value,
                                           const SolverOptions& opt = {},
                                           const RMatrix* start = nullptr) {
  if (!(opt.tol > 0.0)) throw InvalidInput("solve_feasibility: tol must be > 0");
  const auto& s = problem.structure();
  const Eigen::Index n = s.size();
  const Eigen::Index len = n * n;
  const Eigen::Vector3d rhs(1.0, problem.bell_value(), objective_value);

  RMatrix basis = RMatrix::Identity(n, n);
  RMatrix x = start ? *start : RMatrix(RMatrix::Identity(n, n));

  // Anderson history: differences of map outputs and of residual vectors.
  const int mem = std::max(0, opt.anderson_memory);
  RMatrix d_g(len, std::max(mem, 1)), d_f(len, std::max(mem, 1));
  int stored = 0, head = 0;
  Eigen::VectorXd g_prev, f_prev;
  double best = INFINITY;
  RMatrix best_x = x;

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(opt.max_iters));
  FeasibilityReport rep;

  for (int it = 0; it < opt.max_iters; ++it) {
    const RMatrix y = s.assemble(problem.project_affine(x, objective_value));
    const auto eig = jacobi_eigen(y, JacobiOptions{1e-13, 100}, &basis);
    basis = eig.vectors;
    const RMatrix z = eig.vectors * eig.values.cwiseMax(0.0).asDiagonal() *
                      eig.vectors.transpose();
    const double r = (y - z).norm();
    history.push_back(r);
    rep.iterations = it + 1;
    rep.residual = r;
    if (r < opt.tol) {
      rep.status = Feasibility::kFeasible;
      x = z;
      break;
    }
    if (opt.certificate_interval > 0 && it % opt.certificate_interval == 0) {
      const RMatrix neg = eig.vectors *
                          (-eig.values).cwiseMax(0.0).asDiagonal() *
                          eig.vectors.transpose();
      const double scale = neg.norm();
      if (scale > 0.0 &&
          infeasibility_margin(s, problem.constraints(), rhs, neg / scale) <
              -1e-12) {
        rep.status = Feasibility::kInfeasible;
        rep.certified = true;
        x = z;
        break;
      }
    }
    const auto w = static_cast<std::size_t>(opt.stagnation_window);
    if (history.size() > w && r > 10.0 * opt.tol) {
      const double old = history[history.size() - 1 - w];
      if (std::abs(old - r) <= opt.stagnation_rel_change * r) {
        rep.status = Feasibility::kInfeasible;
        x = z;
        break;
      }
    }

    if (r < best) {
      best = r;
      best_x = z;
    } else if (r > 1e3 * best) {
      // Acceleration went astray: restart plain projections from the best
      // iterate seen.
      stored = 0;
      head = 0;
      g_prev.resize(0);
      x = best_x;
      continue;
    }

    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(z.data(), len);
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), len);
    const Eigen::VectorXd f = g - xv;
    if (mem == 0) {
      x = z;
      continue;
    }
    if (g_prev.size() == len) {
      d_g.col(head) = g - g_prev;
      d_f.col(head) = f - f_prev;
      head = (head + 1) % mem;
      stored = std::min(stored + 1, mem);
    }
    g_prev = g;
    f_prev = f;
    if (stored == 0) {
      x = z;
      continue;
    }
    const auto qr = d_f.leftCols(stored).colPivHouseholderQr();
    const Eigen::VectorXd gamma = qr.solve(f);
    const Eigen::VectorXd next = g - d_g.leftCols(stored) * gamma;
    if (!next.allFinite()) {
      stored = 0;
      head = 0;
      g_prev.resize(0);
      x = z;
      continue;
    }
    x = Eigen::Map<const RMatrix>(next.data(), n, n);
    x = ((x + x.transpose()) / 2.0).eval();
  }
  rep.gamma = std::move(x);
  return rep;
}

/// Bisection bracket for the largest feasible value of one target.
struct TargetBracket {
  Outcome target;
  double lo = 0.125;
  double hi = 1.0;
  int solves = 0;
  int inconclusive = 0;
};

struct UpperBound {
  /// Largest upper bracket end over all 32 targets: the reported bound.
  double value = 1.0;
  /// Largest lower bracket end; [lower, value] brackets the relaxation optimum
  /// up to solver reliability.
  double lower = 0.125;
  /// value - lower.
  double uncertainty = 0.0;
  Outcome argmax;
  int solves = 0;
  int inconclusive_steps = 0;
  /// Wall time of the slowest single feasibility solve.
  double max_solve_seconds = 0.0;
  std::vector<TargetBracket> brackets;
};

struct UpperBoundOptions {
  /// Final bracket width.
  double tol = 1e-3;
  SolverOptions solver;
};

/// Upper bound on max_{abc,xy} P(abc|xy) over level-2 moment matrices with the
/// given Bell value.
///
/// For each target, bisection on the pinned objective over [1/8, 1]: a
/// feasible step raises the lower end, an infeasible step lowers the upper
/// end. An inconclusive step is counted and raises the lower end, so the
/// upper end only ever moves on evidence of infeasibility. Targets that are
/// infeasible at the running maximum are skipped after one solve.
inline UpperBound npa_upper_bound(double bell_value,
                                  const UpperBoundOptions& opt = {}) {
  if (!(bell_value >= 0.0) || bell_value > std::sqrt(2.0) + 1e-12)
    throw InvalidInput("npa_upper_bound: bell value must lie in [0, sqrt(2)]");
  if (!(opt.tol > 0.0)) throw InvalidInput("npa_upper_bound: tol must be > 0");
  const MomentStructure structure;
  UpperBound out;
  out.value = -INFINITY;
  out.lower = -INFINITY;
  std::optional<RMatrix> warm;

  auto run = [&](const MomentProblem& prob, double objective, TargetBracket& br) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = solve_feasibility(prob, objective, opt.solver,
                                       warm ? &*warm : nullptr);
    out.max_solve_seconds = std::max(
        out.max_solve_seconds,
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    ++br.solves;
    ++out.solves;
    if (rep.status == Feasibility::kInconclusive) {
      ++br.inconclusive;
      ++out.inconclusive_steps;
    }
    if (rep.status != Feasibility::kInfeasible) warm = rep.gamma;
    return rep.status;
  };

  for (const auto& target : all_outcomes()) {
    const MomentProblem prob(structure, target, bell_value);
    TargetBracket br;
    br.target = target;
    if (out.value >= 1.0) {
      // Nothing can exceed probability one.
      br.hi = 1.0;
      out.brackets.push_back(br);
      continue;
    }
    if (std::isfinite(out.value)) {
      const auto st = run(prob, out.value, br);
      if (st == Feasibility::kInfeasible) {
        br.hi = out.value;
        br.lo = 0.125;
        out.brackets.push_back(br);
        continue;
      }
      br.lo = out.value;
    }
    if (run(prob, 1.0, br) != Feasibility::kInfeasible) {
      br.lo = 1.0;
    }
    while (br.hi - br.lo > opt.tol) {
      const double mid = 0.5 * (br.lo + br.hi);
      if (run(prob, mid, br) == Feasibility::kInfeasible)
        br.hi = mid;
      else
        br.lo = mid;
    }
    if (br.hi > out.value) {
      out.value = br.hi;
      out.argmax = target;
    }
    out.lower = std::max(out.lower, br.lo);
    out.brackets.push_back(br);
  }
  out.uncertainty = out.value - out.lower;
  return out;
}

}  // namespace pchsh::npa
