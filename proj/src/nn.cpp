#include "pheno/nn.hpp"

#include <algorithm>
#include <cmath>

namespace pheno::nn {

Tensor::Tensor(std::vector<int> shp) : shape(std::move(shp)) {
    if (shape.empty() || shape.size() > 3) throw ValidationError("tensor rank must be 1..3");
    size_t n = 1;
    for (int d : shape) {
        if (d < 1) throw ValidationError("tensor axes must be positive");
        n *= static_cast<size_t>(d);
    }
    v.assign(n, 0.0);
    g.assign(n, 0.0);
}

Tensor& ParamStore::add(const std::string& name, std::vector<int> shape) {
    if (params_.count(name)) throw ValidationError("duplicate parameter '" + name + "'");
    order_.push_back(name);
    auto [it, _] = params_.emplace(name, Tensor(std::move(shape)));
    moments[name] = Moments{std::vector<double>(it->second.v.size(), 0.0),
                            std::vector<double>(it->second.v.size(), 0.0)};
    return it->second;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
}

void ParamStore::zero_grads() {
    for (auto& name : order_) params_.find(name)->second.zero_grad();
}

void optimizer_step(ParamStore& store, double lr, double beta1, double beta2, double eps) {
    ++store.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(store.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(store.step));
    for (const auto& name : store.names()) {
        Tensor& t = store.get(name);
        auto& mom = store.moments[name];
        for (size_t i = 0; i < t.v.size(); ++i) {
            double g = t.g[i];
            if (!std::isfinite(g)) throw TrainingError("non-finite gradient in parameter '" + name + "'");
            mom.m[i] = beta1 * mom.m[i] + (1.0 - beta1) * g;
            mom.v[i] = beta2 * mom.v[i] + (1.0 - beta2) * g * g;
            double mhat = mom.m[i] / bc1;
            double vhat = mom.v[i] / bc2;
            t.v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        t.zero_grad();
    }
}

// --- raw kernels -------------------------------------------------------------

std::vector<double> dense_forward(const std::vector<double>& x, const Tensor& W, const Tensor& b) {
    const int in = W.dim(0), out = W.dim(1);
    if (static_cast<int>(x.size()) != in || b.size() != out)
        throw ValidationError("dense: shape mismatch");
    std::vector<double> y(b.v);
    for (int i = 0; i < in; ++i) {
        double xi = x[i];
        const double* wrow = W.v.data() + static_cast<size_t>(i) * out;
        for (int j = 0; j < out; ++j) y[j] += xi * wrow[j];
    }
    return y;
}

void dense_backward(const std::vector<double>& x, const Tensor& W, const std::vector<double>& grad_y,
                    std::vector<double>& grad_x, std::vector<double>& grad_W, std::vector<double>& grad_b) {
    const int in = W.dim(0), out = W.dim(1);
    for (int j = 0; j < out; ++j) grad_b[j] += grad_y[j];
    for (int i = 0; i < in; ++i) {
        const double* wrow = W.v.data() + static_cast<size_t>(i) * out;
        double* gwrow = grad_W.data() + static_cast<size_t>(i) * out;
        double acc = 0.0;
        for (int j = 0; j < out; ++j) {
            gwrow[j] += x[i] * grad_y[j];
            acc += wrow[j] * grad_y[j];
        }
        grad_x[i] += acc;
    }
}

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

std::vector<double> rnn_cell_forward(const std::vector<double>& x, const std::vector<double>& h_prev,
                                     const GruParams& p, GruCache* cache) {
    const int hidden = p.bz->size();
    if (static_cast<int>(h_prev.size()) != hidden) throw ValidationError("rnn cell: hidden size mismatch");

    std::vector<double> az = dense_forward(x, *p.Wz, *p.bz);
    std::vector<double> ar = dense_forward(x, *p.Wr, *p.br);
    {
        std::vector<double> hz = dense_forward(h_prev, *p.Uz, Tensor({hidden}));
        std::vector<double> hr = dense_forward(h_prev, *p.Ur, Tensor({hidden}));
        for (int i = 0; i < hidden; ++i) {
            az[i] += hz[i];
            ar[i] += hr[i];
        }
    }
    std::vector<double> z(hidden), r(hidden);
    for (int i = 0; i < hidden; ++i) {
        z[i] = sigmoid(az[i]);
        r[i] = sigmoid(ar[i]);
    }
    std::vector<double> rh(hidden);
    for (int i = 0; i < hidden; ++i) rh[i] = r[i] * h_prev[i];
    std::vector<double> ac = dense_forward(x, *p.Wc, *p.bc);
    {
        std::vector<double> hc = dense_forward(rh, *p.Uc, Tensor({hidden}));
        for (int i = 0; i < hidden; ++i) ac[i] += hc[i];
    }
    std::vector<double> c(hidden), h(hidden);
    for (int i = 0; i < hidden; ++i) {
        c[i] = std::tanh(ac[i]);
        h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * c[i];
    }
    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->z = z;
        cache->r = r;
        cache->c = c;
        cache->rh = rh;
    }
    return h;
}

void rnn_cell_backward(const GruCache& cache, const GruParams& p, const std::vector<double>& grad_h,
                       std::vector<double>& grad_x, std::vector<double>& grad_h_prev) {
    const int hidden = p.bz->size();
    std::vector<double> dz(hidden), dc(hidden);
    for (int i = 0; i < hidden; ++i) {
        dz[i] = grad_h[i] * (cache.c[i] - cache.h_prev[i]);
        dc[i] = grad_h[i] * cache.z[i];
        grad_h_prev[i] += grad_h[i] * (1.0 - cache.z[i]);
    }

    // candidate path
    std::vector<double> dac(hidden), drh(hidden, 0.0);
    for (int i = 0; i < hidden; ++i) dac[i] = dc[i] * (1.0 - cache.c[i] * cache.c[i]);
    {
        std::vector<double> dummy_b(hidden, 0.0);
        dense_backward(cache.x, *p.Wc, dac, grad_x, p.Wc->g, p.bc->g);
        dense_backward(cache.rh, *p.Uc, dac, drh, p.Uc->g, dummy_b);
    }
    std::vector<double> dar(hidden), daz(hidden);
    for (int i = 0; i < hidden; ++i) {
        double dr = drh[i] * cache.h_prev[i];
        grad_h_prev[i] += drh[i] * cache.r[i];
        dar[i] = dr * cache.r[i] * (1.0 - cache.r[i]);
        daz[i] = dz[i] * cache.z[i] * (1.0 - cache.z[i]);
    }
    {
        std::vector<double> dummy_b(hidden, 0.0);
        dense_backward(cache.x, *p.Wr, dar, grad_x, p.Wr->g, p.br->g);
        dense_backward(cache.h_prev, *p.Ur, dar, grad_h_prev, p.Ur->g, dummy_b);
        dense_backward(cache.x, *p.Wz, daz, grad_x, p.Wz->g, p.bz->g);
        dense_backward(cache.h_prev, *p.Uz, daz, grad_h_prev, p.Uz->g, dummy_b);
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double cross_entropy_weighted(const std::vector<double>& y, const std::vector<double>& p,
                              const std::vector<double>& alpha) {
    if (y.size() != p.size() || y.size() != alpha.size())
        throw ValidationError("weighted cross entropy: length mismatch");
    double loss = 0.0;
    for (size_t c = 0; c < y.size(); ++c) {
        if (!(alpha[c] > 0.0)) throw ValidationError("weighted cross entropy: alpha must be positive");
        if (y[c] != 0.0) loss -= (y[c] / alpha[c]) * std::log(std::max(p[c], kProbClip));
    }
    return loss;
}

// --- tape ---------------------------------------------------------------------

Graph::Ref Graph::push(std::vector<double> v) {
    nodes_.push_back(Node{std::move(v), {}});
    nodes_.back().g.assign(nodes_.back().v.size(), 0.0);
    return static_cast<Ref>(nodes_.size() - 1);
}

Graph::Ref Graph::input(std::vector<double> value) {
    Ref id = push(std::move(value));
    backs_.emplace_back([] {});
    return id;
}

Graph::Ref Graph::param_row(Tensor& table, int row) {
    const int d = table.dim(1);
    std::vector<double> v(table.v.begin() + static_cast<size_t>(row) * d,
                          table.v.begin() + static_cast<size_t>(row + 1) * d);
    Ref id = push(std::move(v));
    Tensor* tp = &table;
    backs_.emplace_back([this, id, tp, row, d] {
        for (int i = 0; i < d; ++i) tp->g[static_cast<size_t>(row) * d + i] += nodes_[id].g[i];
    });
    return id;
}

Graph::Ref Graph::dense(Ref x, Tensor& W, Tensor& b) {
    Ref id = push(dense_forward(nodes_[x].v, W, b));
    Tensor* wp = &W;
    Tensor* bp = &b;
    backs_.emplace_back([this, id, x, wp, bp] {
        dense_backward(nodes_[x].v, *wp, nodes_[id].g, nodes_[x].g, wp->g, bp->g);
    });
    return id;
}

Graph::Ref Graph::tanh_op(Ref x) {
    std::vector<double> v(nodes_[x].v.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(nodes_[x].v[i]);
    Ref id = push(std::move(v));
    backs_.emplace_back([this, id, x] {
        for (size_t i = 0; i < nodes_[id].v.size(); ++i)
            nodes_[x].g[i] += nodes_[id].g[i] * (1.0 - nodes_[id].v[i] * nodes_[id].v[i]);
    });
    return id;
}

Graph::Ref Graph::gru_cell(Ref x, Ref h_prev, const GruParams& p) {
    auto cache = std::make_shared<GruCache>();
    Ref id = push(rnn_cell_forward(nodes_[x].v, nodes_[h_prev].v, p, cache.get()));
    backs_.emplace_back([this, id, x, h_prev, p, cache] {
        rnn_cell_backward(*cache, p, nodes_[id].g, nodes_[x].g, nodes_[h_prev].g);
    });
    return id;
}

Graph::Ref Graph::softmax_op(Ref logits) {
    Ref id = push(softmax(nodes_[logits].v));
    backs_.emplace_back([this, id, logits] {
        const auto& pv = nodes_[id].v;
        const auto& gp = nodes_[id].g;
        double dot = 0.0;
        for (size_t i = 0; i < pv.size(); ++i) dot += pv[i] * gp[i];
        for (size_t i = 0; i < pv.size(); ++i) nodes_[logits].g[i] += pv[i] * (gp[i] - dot);
    });
    return id;
}

Graph::Ref Graph::weighted_ce(Ref probs, const std::vector<double>& y, const std::vector<double>& alpha) {
    double loss = cross_entropy_weighted(y, nodes_[probs].v, alpha);
    Ref id = push({loss});
    backs_.emplace_back([this, id, probs, y, alpha] {
        double seed = nodes_[id].g[0];
        for (size_t c = 0; c < y.size(); ++c) {
            if (y[c] == 0.0) continue;
            double pc = nodes_[probs].v[c];
            if (pc <= kProbClip) continue;  // clip active, loss locally constant
            nodes_[probs].g[c] += seed * (-(y[c] / alpha[c]) / pc);
        }
    });
    return id;
}

Graph::Ref Graph::weighted_ce_logits(Ref logits, const std::vector<double>& y,
                                     const std::vector<double>& alpha) {
    std::vector<double> p = softmax(nodes_[logits].v);
    double loss = cross_entropy_weighted(y, p, alpha);
    Ref id = push({loss});
    backs_.emplace_back([this, id, logits, p, y, alpha] {
        double seed = nodes_[id].g[0];
        double wsum = 0.0;
        for (size_t c = 0; c < y.size(); ++c) wsum += y[c] / alpha[c];
        for (size_t c = 0; c < y.size(); ++c)
            nodes_[logits].g[c] += seed * (p[c] * wsum - y[c] / alpha[c]);
    });
    return id;
}

Graph::Ref Graph::log_pick(Ref probs, int k) {
    double pk = std::max(nodes_[probs].v[k], kProbClip);
    Ref id = push({std::log(pk)});
    backs_.emplace_back([this, id, probs, k] {
        double pk2 = nodes_[probs].v[k];
        if (pk2 <= kProbClip) return;
        nodes_[probs].g[k] += nodes_[id].g[0] / pk2;
    });
    return id;
}

Graph::Ref Graph::entropy(Ref probs) {
    const auto& p = nodes_[probs].v;
    double h = 0.0;
    for (double v : p) h -= v * std::log(std::max(v, kProbClip));
    Ref id = push({h});
    backs_.emplace_back([this, id, probs] {
        double seed = nodes_[id].g[0];
        for (size_t i = 0; i < nodes_[probs].v.size(); ++i) {
            double pi = nodes_[probs].v[i];
            if (pi <= kProbClip) continue;
            nodes_[probs].g[i] += seed * (-(std::log(pi) + 1.0));
        }
    });
    return id;
}

Graph::Ref Graph::sq_dist(Ref a, Ref b) {
    const auto& va = nodes_[a].v;
    const auto& vb = nodes_[b].v;
    if (va.size() != vb.size()) throw ValidationError("sq_dist: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < va.size(); ++i) acc += (va[i] - vb[i]) * (va[i] - vb[i]);
    Ref id = push({acc});
    backs_.emplace_back([this, id, a, b] {
        double seed = nodes_[id].g[0];
        for (size_t i = 0; i < nodes_[a].v.size(); ++i) {
            double diff = nodes_[a].v[i] - nodes_[b].v[i];
            nodes_[a].g[i] += seed * 2.0 * diff;
            nodes_[b].g[i] -= seed * 2.0 * diff;
        }
    });
    return id;
}

Graph::Ref Graph::stop_grad(Ref x) {
    Ref id = push(nodes_[x].v);
    backs_.emplace_back([] {});
    return id;
}

Graph::Ref Graph::mean_vec(const std::vector<Ref>& xs) {
    if (xs.empty()) throw ValidationError("mean_vec: empty list");
    std::vector<double> v(nodes_[xs[0]].v.size(), 0.0);
    for (Ref x : xs)
        for (size_t i = 0; i < v.size(); ++i) v[i] += nodes_[x].v[i];
    for (double& e : v) e /= static_cast<double>(xs.size());
    Ref id = push(std::move(v));
    backs_.emplace_back([this, id, xs] {
        double inv = 1.0 / static_cast<double>(xs.size());
        for (Ref x : xs)
            for (size_t i = 0; i < nodes_[id].v.size(); ++i) nodes_[x].g[i] += inv * nodes_[id].g[i];
    });
    return id;
}

Graph::Ref Graph::scalar_sum(const std::vector<std::pair<Ref, double>>& terms, double constant) {
    double acc = constant;
    for (const auto& [r, w] : terms) acc += w * nodes_[r].v[0];
    Ref id = push({acc});
    backs_.emplace_back([this, id, terms] {
        for (const auto& [r, w] : terms) nodes_[r].g[0] += w * nodes_[id].g[0];
    });
    return id;
}

void Graph::backward(Ref root) {
    if (nodes_[root].v.size() != 1) throw ValidationError("backward: root must be scalar");
    nodes_[root].g[0] = 1.0;
    for (auto it = backs_.rbegin(); it != backs_.rend(); ++it) (*it)();
}

double grad_check(const std::function<double()>& loss_fn, const std::vector<Tensor*>& params, double eps) {
    for (Tensor* t : params) t->zero_grad();
    double base = loss_fn();
    if (!std::isfinite(base)) throw ValidationError("grad_check: loss is not finite");

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (Tensor* t : params) analytic.push_back(t->g);

    double max_rel = 0.0;
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        for (size_t i = 0; i < t.v.size(); ++i) {
            double orig = t.v[i];
            t.v[i] = orig + eps;
            double up = loss_fn();
            t.v[i] = orig - eps;
            double dn = loss_fn();
            t.v[i] = orig;
            double fd = (up - dn) / (2.0 * eps);
            double a = analytic[p][i];
            double rel = std::abs(a - fd) / std::max(std::abs(a) + std::abs(fd), 1e-6);
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

void init_uniform(Tensor& t, Rng& rng, double scale) {
    for (double& v : t.v) v = (2.0 * rng.uniform() - 1.0) * scale;
}

void init_dense(Tensor& W, Tensor& b, Rng& rng) {
    init_uniform(W, rng, 1.0 / std::sqrt(static_cast<double>(W.dim(0))));
    std::fill(b.v.begin(), b.v.end(), 0.0);
}

}  // namespace pheno::nn
