#pragma once

#include "nem/mixture.hpp"
#include "nem/trace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace nem {

class ModelMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double elu(double x);
double elu_prime(double x);

using Activation = std::function<double(double)>;

/// Nodes and weights for E[f(G)], G ~ N(0,1) (probabilists' Hermite weight), by Golub-Welsch.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // sum to 1
};
GaussHermiteRule gauss_hermite(int nodes);

struct KernelValue {
  double K = 0.0;       // E[sigma(G1) sigma(G2)] with correlation q
  double sigma1 = 0.0;  // E[G sigma(G)]
};

/// G2 = q G1 + sqrt(1 - q^2) G3, tensorized Gauss-Hermite over (G1, G3).
KernelValue kernel_quadrature(double q, const Activation& sigma = elu, int nodes = 64);

/// K0(q) = K(q) - sigma1^2 q.
double kernel_k0(double q, const Activation& sigma = elu, int nodes = 64);

/// Normalized Hermite coefficients c_k = E[sigma(G) He_k(G)] / sqrt(k!), k = 0..degree,
/// by adaptive quadrature split at the origin (ELU is only C^1 there).
std::vector<double> hermite_coefficients(const Activation& sigma, int degree);

/// xi(q) = 1 + a^2 K0(q) = 1 + a^2 sum_{k != 1} c_k^2 q^k, truncated at degree_cap.
MixtureXi xi_from_network(double a, int degree_cap = 12, const Activation& sigma = elu);

struct NNConfig {
  int m = 20;  // hidden units, even
  int D = 20;  // input dimension
  int n = 40;  // samples
  double a = 1.0;
  double lr = 0.1;
  int epochs = 2000;
  int batch = 4;
  double eps_init = 0.03;
  std::uint64_t seed = 0;

  int d() const { return m * D; }
  double alpha() const { return static_cast<double>(n) / (static_cast<double>(m) * D); }
  void validate() const;
};

/// Training data and the fixed second-layer signs.
struct NNProblem {
  Eigen::MatrixXd Z;        // n x D inputs
  Eigen::VectorXd y;        // labels in {-1, +1}
  Eigen::VectorXd s;        // balanced signs, length m
};
NNProblem make_problem(const NNConfig& cfg);

/// f(z; W) = (a / sqrt(m)) sum_j s_j sigma(<w_j, z>) for every row of Z.
Eigen::VectorXd network_output(const NNProblem& p, const Eigen::MatrixXd& W, double a);
/// (1/2n) sum_i (y_i - f(z_i; W))^2.
double training_error(const NNProblem& p, const Eigen::MatrixXd& W, double a);

struct TrainResult {
  RunTrace trace;  // one record per epoch: u = training error, aux frob_sq = |W|_F^2
  Eigen::MatrixXd W;
  double final_error = 0.0;
  double max_frob_sq = 0.0;  // largest |W|_F^2 seen after any step
};

/// Minibatch SGD, reshuffled every epoch, with eta_k = lr / sqrt(1 + E(k)) where E(k) is the
/// index of the pass over the data, followed by projection onto |W|_F^2 <= m.
TrainResult train_interpolation(const NNConfig& cfg);

}  // namespace nem
