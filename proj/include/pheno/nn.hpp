#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pheno/core.hpp"

namespace pheno::nn {

// Values plus a gradient buffer of the same shape. Rank <= 3.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;
    std::vector<double> g;

    Tensor() = default;
    explicit Tensor(std::vector<int> shp);

    int size() const { return static_cast<int>(v.size()); }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
    int dim(int axis) const { return shape[axis]; }
};

// Named parameters with per-parameter first/second moment state.
class ParamStore {
  public:
    Tensor& add(const std::string& name, std::vector<int> shape);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) != 0; }
    const std::vector<std::string>& names() const { return order_; }
    void zero_grads();

    int64_t step = 0;
    struct Moments {
        std::vector<double> m, v;
    };
    std::map<std::string, Moments> moments;

  private:
    std::vector<std::string> order_;
    std::map<std::string, Tensor> params_;
};

// Adaptive-moment update with bias correction; zeroes gradients afterwards.
// A non-finite gradient raises TrainingError naming the parameter.
void optimizer_step(ParamStore& store, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                    double eps = 1e-8);

// --- raw forward/backward kernels -----------------------------------------

// y = x W + b with x a length-`in` vector, W [in x out], b [out].
std::vector<double> dense_forward(const std::vector<double>& x, const Tensor& W, const Tensor& b);
// Accumulates into grad_x / grad_W / grad_b (sized by caller).
void dense_backward(const std::vector<double>& x, const Tensor& W, const std::vector<double>& grad_y,
                    std::vector<double>& grad_x, std::vector<double>& grad_W, std::vector<double>& grad_b);

// Gated recurrent cell: update gate z, reset gate r, tanh candidate c,
// h' = (1-z) h + z c.
struct GruParams {
    Tensor *Wz, *Uz, *bz;
    Tensor *Wr, *Ur, *br;
    Tensor *Wc, *Uc, *bc;
};

struct GruCache {
    std::vector<double> x, h_prev, z, r, c, rh;
};

std::vector<double> rnn_cell_forward(const std::vector<double>& x, const std::vector<double>& h_prev,
                                     const GruParams& p, GruCache* cache = nullptr);
void rnn_cell_backward(const GruCache& cache, const GruParams& p, const std::vector<double>& grad_h,
                       std::vector<double>& grad_x, std::vector<double>& grad_h_prev);

std::vector<double> softmax(const std::vector<double>& logits);

constexpr double kProbClip = 1e-12;

// -sum_c (1/alpha_c) y_c log p_c with probabilities clipped at kProbClip.
double cross_entropy_weighted(const std::vector<double>& y, const std::vector<double>& p,
                              const std::vector<double>& alpha);

// --- reverse-mode tape ------------------------------------------------------

// Records forward values and backward closures; ops only reference earlier
// nodes, so running closures in reverse is a topological sweep. Parameters
// enter ops as Tensor references and receive gradients in their .g buffers.
class Graph {
  public:
    using Ref = int;

    Ref input(std::vector<double> value);
    Ref param_row(Tensor& table, int row);  // one row of a [K x D] tensor
    Ref dense(Ref x, Tensor& W, Tensor& b);
    Ref tanh_op(Ref x);
    Ref gru_cell(Ref x, Ref h_prev, const GruParams& p);
    Ref softmax_op(Ref logits);
    Ref weighted_ce(Ref probs, const std::vector<double>& y, const std::vector<double>& alpha);
    Ref weighted_ce_logits(Ref logits, const std::vector<double>& y, const std::vector<double>& alpha);
    Ref log_pick(Ref probs, int k);
    Ref entropy(Ref probs);
    Ref sq_dist(Ref a, Ref b);
    Ref stop_grad(Ref x);
    Ref mean_vec(const std::vector<Ref>& xs);
    // weighted sum of scalar nodes plus an optional constant
    Ref scalar_sum(const std::vector<std::pair<Ref, double>>& terms, double constant = 0.0);

    const std::vector<double>& value(Ref id) const { return nodes_[id].v; }
    double scalar(Ref id) const { return nodes_[id].v[0]; }

    // Seeds d(root)=1 and accumulates into node grads and parameter .g.
    void backward(Ref root);

  private:
    struct Node {
        std::vector<double> v, g;
    };
    Ref push(std::vector<double> v);
    std::vector<Node> nodes_;
    std::vector<std::function<void()>> backs_;
};

// Central finite differences against the analytic gradients produced by
// `loss_fn` (which must zero nothing itself; grads are managed here).
// Returns the max relative error over all coordinates of `params`.
double grad_check(const std::function<double()>& loss_fn, const std::vector<Tensor*>& params,
                  double eps = 1e-5);

// Deterministic uniform(-scale, scale) fill, scale = 1/sqrt(fan_in).
void init_dense(Tensor& W, Tensor& b, Rng& rng);
void init_uniform(Tensor& t, Rng& rng, double scale);

}  // namespace pheno::nn
