#include "supermarket/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace supermarket {

namespace {

std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

QueueState TruncatedChain::state(std::size_t index) const {
  const std::size_t n = params_.n();
  std::vector<QueueLength> x(n);
  for (std::size_t j = n; j-- > 0;) {
    x[j] = static_cast<QueueLength>(index % (cap_ + 1));
    index /= cap_ + 1;
  }
  return QueueState(std::move(x));
}

std::size_t TruncatedChain::index(const QueueState& x) const {
  std::size_t idx = 0;
  for (QueueLength len : x.lengths()) idx = idx * (cap_ + 1) + len;
  return idx;
}

std::vector<std::uint64_t> TruncatedChain::routing_counts(const QueueState& x) const {
  const std::size_t n = params_.n();
  const unsigned d = params_.d();
  const std::uint64_t lists = ipow(n, d);
  std::vector<std::uint64_t> counts(n, 0);
  std::vector<std::size_t> list(d);
  for (std::uint64_t code = 0; code < lists; ++code) {
    std::uint64_t rest = code;
    for (unsigned i = 0; i < d; ++i) {
      list[i] = rest % n;
      rest /= n;
    }
    // Literal rule: scan the list, keep the first position holding the
    // smallest length seen so far.
    std::size_t chosen = list[0];
    QueueLength shortest = x[list[0]];
    for (unsigned i = 1; i < d; ++i) {
      if (x[list[i]] < shortest) {
        shortest = x[list[i]];
        chosen = list[i];
      }
    }
    ++counts[chosen];
  }
  return counts;
}

bool TruncatedChain::rows_balance_exactly() const {
  const std::uint64_t lists = ipow(params_.n(), params_.d());
  for (std::size_t s = 0; s < state_count_; ++s) {
    const QueueState x = state(s);
    const auto counts = routing_counts(x);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total != lists) return false;
  }
  return true;
}

unsigned default_cap(const ModelParams& params) {
  const double n = static_cast<double>(params.n());
  unsigned cap = 1;
  while (n * std::pow(params.lambda(), cap) >= 1e-10) ++cap;
  return cap;
}

TruncatedChain build_chain(const ModelParams& params, unsigned cap) {
  if (params.n() > 4) throw ValidationError("n", "exact oracle supports n <= 4");
  if (cap < 1) throw ValidationError("cap", "must be at least 1");
  std::size_t states = 1;
  for (std::size_t j = 0; j < params.n(); ++j) {
    states *= cap + 1;
    if (states > kMaxOracleStates) throw ValidationError("cap", "state space too large");
  }
  TruncatedChain chain(params, cap);
  chain.state_count_ = states;
  chain.diagonal_.assign(states, 0.0);
  const double n = static_cast<double>(params.n());
  const double list_prob = 1.0 / static_cast<double>(ipow(params.n(), params.d()));
  std::vector<std::size_t> stride(params.n());
  for (std::size_t j = params.n(), s = 1; j-- > 0; s *= cap + 1) stride[j] = s;

  for (std::size_t s = 0; s < states; ++s) {
    const QueueState x = chain.state(s);
    double out = 0.0;
    const auto counts = chain.routing_counts(x);
    for (std::size_t j = 0; j < params.n(); ++j) {
      if (counts[j] > 0 && x[j] < cap) {
        const double rate = params.lambda() * n * static_cast<double>(counts[j]) * list_prob;
        chain.transitions_.push_back({s, s + stride[j], rate});
        out += rate;
      }
      if (x[j] > 0) {
        chain.transitions_.push_back({s, s - stride[j], 1.0});
        out += 1.0;
      }
    }
    chain.diagonal_[s] = -out;
  }
  return chain;
}

std::vector<double> stationary(const TruncatedChain& chain) {
  using SpMat = Eigen::SparseMatrix<double>;
  const auto size = static_cast<Eigen::Index>(chain.state_count());
  // Rows of A = G^T are balance equations; the last one is replaced by
  // the normalisation sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(chain.transitions().size() + 2 * chain.state_count());
  const Eigen::Index last = size - 1;
  for (const Transition& t : chain.transitions()) {
    const auto row = static_cast<Eigen::Index>(t.to);
    if (row != last) triplets.emplace_back(row, static_cast<Eigen::Index>(t.from), t.rate);
  }
  for (Eigen::Index s = 0; s < size; ++s) {
    if (s != last) triplets.emplace_back(s, s, chain.diagonal()[static_cast<std::size_t>(s)]);
    triplets.emplace_back(last, s, 1.0);
  }
  SpMat A(size, size);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("oracle: singular generator system (chain construction bug)");
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
  b(last) = 1.0;
  Eigen::VectorXd pi = lu.solve(b);
  // One step of iterative refinement.
  const Eigen::VectorXd r = b - A * pi;
  pi += lu.solve(r);
  if (lu.info() != Eigen::Success) throw std::runtime_error("oracle: solve failed");

  std::vector<double> out(chain.state_count());
  double total = 0.0;
  for (Eigen::Index s = 0; s < size; ++s) {
    out[static_cast<std::size_t>(s)] = std::max(0.0, pi(s));
    total += out[static_cast<std::size_t>(s)];
  }
  for (double& p : out) p /= total;
  return out;
}

double stationary_residual(const TruncatedChain& chain, const std::vector<double>& pi) {
  std::vector<double> flow(chain.state_count(), 0.0);
  for (std::size_t s = 0; s < chain.state_count(); ++s) flow[s] = pi[s] * chain.diagonal()[s];
  for (const Transition& t : chain.transitions()) flow[t.to] += pi[t.from] * t.rate;
  double m = 0.0;
  for (double f : flow) m = std::max(m, std::fabs(f));
  return m;
}

EmpiricalLaw exact_marginal(const TruncatedChain& chain, const std::vector<double>& pi) {
  std::vector<double> mass(chain.cap() + 1, 0.0);
  for (std::size_t s = 0; s < chain.state_count(); ++s) mass[chain.state(s)[0]] += pi[s];
  const std::size_t extent = mass.size();
  return EmpiricalLaw(1, extent, std::move(mass));
}

EmpiricalLaw exact_joint(const TruncatedChain& chain, const std::vector<double>& pi) {
  if (chain.params().n() < 2) throw ValidationError("n", "joint law needs at least two queues");
  const std::size_t extent = chain.cap() + 1;
  std::vector<double> mass(extent * extent, 0.0);
  for (std::size_t s = 0; s < chain.state_count(); ++s) {
    const QueueState x = chain.state(s);
    mass[x[0] * extent + x[1]] += pi[s];
  }
  return EmpiricalLaw(2, extent, std::move(mass));
}

TailAverages exact_tail_averages(const TruncatedChain& chain, const std::vector<double>& pi) {
  const std::size_t n = chain.params().n();
  const unsigned d = chain.params().d();
  TailAverages out;
  out.n = n;
  out.u.assign(chain.cap() + 2, 0.0);
  out.u_pow.assign(chain.cap() + 2, 0.0);
  out.count_sq.assign(chain.cap() + 2, 0.0);
  for (std::size_t s = 0; s < chain.state_count(); ++s) {
    const QueueState x = chain.state(s);
    const auto counts = tail_counts(x);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double c = static_cast<double>(counts[k]);
      const double u = c / static_cast<double>(n);
      double p = 1.0;
      for (unsigned i = 0; i < d; ++i) p *= u;
      out.u[k] += pi[s] * u;
      out.u_pow[k] += pi[s] * p;
      out.count_sq[k] += pi[s] * c * c;
    }
  }
  return out;
}

void write_oracle_json(std::ostream& out, const TruncatedChain& chain,
                       const std::vector<double>& pi) {
  nlohmann::json j;
  j["n"] = chain.params().n();
  j["lambda"] = chain.params().lambda();
  j["d"] = chain.params().d();
  j["cap"] = chain.cap();
  j["states"] = chain.state_count();
  j["residual"] = stationary_residual(chain, pi);
  const EmpiricalLaw marginal = exact_marginal(chain, pi);
  j["marginal"] = std::vector<double>(marginal.masses().begin(), marginal.masses().end());
  if (chain.params().n() >= 2) {
    const EmpiricalLaw joint = exact_joint(chain, pi);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t a = 0; a < joint.extent(); ++a) {
      const auto row = joint.masses().subspan(a * joint.extent(), joint.extent());
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["joint01"] = rows;
  }
  out << j.dump(2) << '\n';
}

}  // namespace supermarket
