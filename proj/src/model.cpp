#include "ketgpt/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

namespace ketgpt::nn {

namespace {

constexpr double kLnEps = 1e-5;

// C (n x p) += A (n x m) @ B (m x p)
void mm_acc(const Tensor2& A, const Tensor2& B, Tensor2& C) {
    for (int i = 0; i < A.rows; i++)
        for (int t = 0; t < A.cols; t++) {
            double a = A.at(i, t);
            if (a == 0.0) continue;
            for (int j = 0; j < B.cols; j++) C.at(i, j) += a * B.at(t, j);
        }
}

// C (n x p) += A^T (n x m)^T... A is (m x n), B is (m x p)
void mm_At_B_acc(const Tensor2& A, const Tensor2& B, Tensor2& C) {
    for (int t = 0; t < A.rows; t++)
        for (int i = 0; i < A.cols; i++) {
            double a = A.at(t, i);
            if (a == 0.0) continue;
            for (int j = 0; j < B.cols; j++) C.at(i, j) += a * B.at(t, j);
        }
}

// C (n x p) += A (n x m) @ B^T, B is (p x m)
void mm_A_Bt_acc(const Tensor2& A, const Tensor2& B, Tensor2& C) {
    for (int i = 0; i < A.rows; i++)
        for (int j = 0; j < B.rows; j++) {
            double dot = 0.0;
            for (int t = 0; t < A.cols; t++) dot += A.at(i, t) * B.at(j, t);
            C.at(i, j) += dot;
        }
}

Tensor2 linear(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
    Tensor2 out(x.rows, w.cols);
    mm_acc(x, w, out);
    for (int i = 0; i < out.rows; i++)
        for (int j = 0; j < out.cols; j++) out.at(i, j) += b.at(0, j);
    return out;
}

struct LnStats {
    std::vector<double> mean, rstd;
};

Tensor2 layernorm(const Tensor2& x, const Tensor2& g, const Tensor2& b,
                  LnStats& st) {
    Tensor2 out(x.rows, x.cols);
    st.mean.resize(x.rows);
    st.rstd.resize(x.rows);
    for (int i = 0; i < x.rows; i++) {
        double mu = 0.0;
        for (int j = 0; j < x.cols; j++) mu += x.at(i, j);
        mu /= x.cols;
        double var = 0.0;
        for (int j = 0; j < x.cols; j++) {
            double d = x.at(i, j) - mu;
            var += d * d;
        }
        var /= x.cols;
        double rstd = 1.0 / std::sqrt(var + kLnEps);
        st.mean[i] = mu;
        st.rstd[i] = rstd;
        for (int j = 0; j < x.cols; j++)
            out.at(i, j) = (x.at(i, j) - mu) * rstd * g.at(0, j) + b.at(0, j);
    }
    return out;
}

// dy -> dx (accumulated), dg/db (accumulated).
void layernorm_backward(const Tensor2& x, const Tensor2& g, const LnStats& st,
                        const Tensor2& dy, Tensor2& dx, Tensor2& dg, Tensor2& db) {
    const int n = x.cols;
    for (int i = 0; i < x.rows; i++) {
        double mu = st.mean[i], rstd = st.rstd[i];
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int j = 0; j < n; j++) {
            double xhat = (x.at(i, j) - mu) * rstd;
            double dyv = dy.at(i, j);
            dg.at(0, j) += dyv * xhat;
            db.at(0, j) += dyv;
            double dxhat = dyv * g.at(0, j);
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
        }
        for (int j = 0; j < n; j++) {
            double xhat = (x.at(i, j) - mu) * rstd;
            double dxhat = dy.at(i, j) * g.at(0, j);
            dx.at(i, j) += rstd * (dxhat - sum_dxhat / n - xhat * sum_dxhat_xhat / n);
        }
    }
}

struct LayerCache {
    Tensor2 x_in, n1;
    LnStats ln1;
    Tensor2 q, k, v;
    std::vector<Tensor2> probs;  // per head, T x T
    Tensor2 concat;              // head outputs before w_o
    Tensor2 x_mid, n2;
    LnStats ln2;
    Tensor2 fc_pre, fc_act;
};

struct Cache {
    Tensor2 x0;
    std::vector<LayerCache> layers;
    Tensor2 x_final, nf;
    LnStats lnf;
};

Tensor2 forward_cached(const TransformerModel& m, const std::vector<int>& tokens,
                       Cache* cache, ForwardTrace* trace) {
    const ModelConfig& cfg = m.config;
    const int T = static_cast<int>(tokens.size());
    if (T > cfg.n_positions)
        throw SequenceTooLong("sequence length " + std::to_string(T) +
                              " exceeds n_positions " +
                              std::to_string(cfg.n_positions));
    const int d = cfg.n_embd, H = cfg.n_head, dk = cfg.d_k();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    Tensor2 x(T, d);
    for (int t = 0; t < T; t++)
        for (int j = 0; j < d; j++)
            x.at(t, j) = m.tok_emb.at(tokens[t], j) + m.pos_emb.at(t, j);
    if (cache) cache->x0 = x;
    if (cache) cache->layers.resize(cfg.n_layer);

    for (int l = 0; l < cfg.n_layer; l++) {
        const LayerParams& p = m.layers[l];
        LayerCache local;
        LayerCache& lc = cache ? cache->layers[l] : local;
        lc.x_in = x;
        lc.n1 = layernorm(x, p.ln1_g, p.ln1_b, lc.ln1);
        lc.q = linear(lc.n1, p.w_q, p.b_q);
        lc.k = linear(lc.n1, p.w_k, p.b_k);
        lc.v = linear(lc.n1, p.w_v, p.b_v);

        lc.concat = Tensor2(T, d);
        lc.probs.resize(H);
        for (int h = 0; h < H; h++) {
            Tensor2& pr = lc.probs[h];
            pr = Tensor2(T, T);
            const int off = h * dk;
            for (int i = 0; i < T; i++) {
                for (int j = 0; j < T; j++) {
                    if (cfg.causal && j > i) {
                        pr.at(i, j) = -std::numeric_limits<double>::infinity();
                        continue;
                    }
                    double dot = 0.0;
                    for (int t = 0; t < dk; t++)
                        dot += lc.q.at(i, off + t) * lc.k.at(j, off + t);
                    pr.at(i, j) = dot * scale;
                }
                softmax_inplace(pr.row(i));
                for (int j = 0; j < T; j++) {
                    double w = pr.at(i, j);
                    if (w == 0.0) continue;
                    for (int t = 0; t < dk; t++)
                        lc.concat.at(i, off + t) += w * lc.v.at(j, off + t);
                }
            }
            if (trace) trace->attn_weights.push_back(pr);
        }
        Tensor2 atto = linear(lc.concat, p.w_o, p.b_o);
        lc.x_mid = Tensor2(T, d);
        for (size_t i = 0; i < lc.x_mid.size(); i++)
            lc.x_mid.data[i] = lc.x_in.data[i] + atto.data[i];

        lc.n2 = layernorm(lc.x_mid, p.ln2_g, p.ln2_b, lc.ln2);
        lc.fc_pre = linear(lc.n2, p.w_fc, p.b_fc);
        lc.fc_act = lc.fc_pre;
        for (double& v : lc.fc_act.data) v = gelu(v);
        Tensor2 proj = linear(lc.fc_act, p.w_proj, p.b_proj);
        x = Tensor2(T, d);
        for (size_t i = 0; i < x.size(); i++)
            x.data[i] = lc.x_mid.data[i] + proj.data[i];
    }

    LnStats lnf_local;
    LnStats& lnf = cache ? cache->lnf : lnf_local;
    Tensor2 nf = layernorm(x, m.lnf_g, m.lnf_b, lnf);
    if (cache) {
        cache->x_final = x;
        cache->nf = nf;
    }

    if (cfg.classifier_head) {
        Tensor2 pooled(1, m.config.n_embd);
        for (int j = 0; j < d; j++) pooled.at(0, j) = nf.at(0, j);
        return linear(pooled, m.head_w, m.head_b);
    }
    Tensor2 logits(T, cfg.vocab_size);
    mm_A_Bt_acc(nf, m.tok_emb, logits);
    return logits;
}

// Backprop from d_nf through the stack into grads. Consumes the cache.
void backward_stack(const TransformerModel& m, const std::vector<int>& tokens,
                    const Cache& cache, Tensor2 d_nf, TransformerModel& grads) {
    const ModelConfig& cfg = m.config;
    const int T = static_cast<int>(tokens.size());
    const int d = cfg.n_embd, H = cfg.n_head, dk = cfg.d_k();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    Tensor2 dx(T, d);
    layernorm_backward(cache.x_final, m.lnf_g, cache.lnf, d_nf, dx, grads.lnf_g,
                       grads.lnf_b);

    for (int l = cfg.n_layer - 1; l >= 0; l--) {
        const LayerParams& p = m.layers[l];
        const LayerCache& lc = cache.layers[l];
        LayerParams& gp = grads.layers[l];

        // MLP branch: dx is gradient at x_out = x_mid + proj(gelu(fc(n2)))
        Tensor2 d_fc_act(T, 4 * d);
        mm_A_Bt_acc(dx, p.w_proj, d_fc_act);
        mm_At_B_acc(lc.fc_act, dx, gp.w_proj);
        for (int i = 0; i < T; i++)
            for (int j = 0; j < d; j++) gp.b_proj.at(0, j) += dx.at(i, j);

        Tensor2 d_fc_pre(T, 4 * d);
        for (size_t i = 0; i < d_fc_pre.size(); i++)
            d_fc_pre.data[i] = d_fc_act.data[i] * gelu_grad(lc.fc_pre.data[i]);
        mm_At_B_acc(lc.n2, d_fc_pre, gp.w_fc);
        for (int i = 0; i < T; i++)
            for (int j = 0; j < 4 * d; j++) gp.b_fc.at(0, j) += d_fc_pre.at(i, j);
        Tensor2 d_n2(T, d);
        mm_A_Bt_acc(d_fc_pre, p.w_fc, d_n2);

        Tensor2 d_x_mid = dx;  // residual path
        layernorm_backward(lc.x_mid, p.ln2_g, lc.ln2, d_n2, d_x_mid, gp.ln2_g,
                           gp.ln2_b);

        // Attention branch: d_x_mid is gradient at x_mid = x_in + w_o(concat)
        Tensor2 d_concat(T, d);
        mm_A_Bt_acc(d_x_mid, p.w_o, d_concat);
        mm_At_B_acc(lc.concat, d_x_mid, gp.w_o);
        for (int i = 0; i < T; i++)
            for (int j = 0; j < d; j++) gp.b_o.at(0, j) += d_x_mid.at(i, j);

        Tensor2 dq(T, d), dK(T, d), dV(T, d);
        for (int h = 0; h < H; h++) {
            const Tensor2& pr = lc.probs[h];
            const int off = h * dk;
            for (int i = 0; i < T; i++) {
                // dprobs and softmax backward for row i
                std::vector<double> dprobs(T, 0.0);
                for (int j = 0; j < T; j++) {
                    if (cfg.causal && j > i) continue;
                    double dot = 0.0;
                    for (int t = 0; t < dk; t++)
                        dot += d_concat.at(i, off + t) * lc.v.at(j, off + t);
                    dprobs[j] = dot;
                    double w = pr.at(i, j);
                    for (int t = 0; t < dk; t++)
                        dV.at(j, off + t) += w * d_concat.at(i, off + t);
                }
                double inner = 0.0;
                for (int j = 0; j < T; j++) inner += dprobs[j] * pr.at(i, j);
                for (int j = 0; j < T; j++) {
                    if (cfg.causal && j > i) continue;
                    double ds = pr.at(i, j) * (dprobs[j] - inner) * scale;
                    if (ds == 0.0) continue;
                    for (int t = 0; t < dk; t++) {
                        dq.at(i, off + t) += ds * lc.k.at(j, off + t);
                        dK.at(j, off + t) += ds * lc.q.at(i, off + t);
                    }
                }
            }
        }

        Tensor2 d_n1(T, d);
        mm_A_Bt_acc(dq, p.w_q, d_n1);
        mm_A_Bt_acc(dK, p.w_k, d_n1);
        mm_A_Bt_acc(dV, p.w_v, d_n1);
        mm_At_B_acc(lc.n1, dq, gp.w_q);
        mm_At_B_acc(lc.n1, dK, gp.w_k);
        mm_At_B_acc(lc.n1, dV, gp.w_v);
        for (int i = 0; i < T; i++)
            for (int j = 0; j < d; j++) {
                gp.b_q.at(0, j) += dq.at(i, j);
                gp.b_k.at(0, j) += dK.at(i, j);
                gp.b_v.at(0, j) += dV.at(i, j);
            }

        Tensor2 d_x_in = d_x_mid;  // residual path
        layernorm_backward(lc.x_in, p.ln1_g, lc.ln1, d_n1, d_x_in, gp.ln1_g,
                           gp.ln1_b);
        dx = std::move(d_x_in);
    }

    for (int t = 0; t < T; t++)
        for (int j = 0; j < d; j++) {
            grads.tok_emb.at(tokens[t], j) += dx.at(t, j);
            grads.pos_emb.at(t, j) += dx.at(t, j);
        }
}

bool decayable(const std::string& name) {
    return name == "tok_emb" || name == "pos_emb" || name == "head_w" ||
           name.find(".w_") != std::string::npos;
}

}  // namespace

void ModelConfig::check() const {
    if (n_embd <= 0 || n_layer <= 0 || n_head <= 0 || n_positions <= 0 ||
        vocab_size <= 0)
        throw std::invalid_argument("model dimensions must be positive");
    if (n_embd % n_head != 0)
        throw std::invalid_argument("n_embd must be divisible by n_head");
}

TransformerModel TransformerModel::init(const ModelConfig& cfg, uint64_t seed) {
    cfg.check();
    TransformerModel m;
    m.config = cfg;
    const int d = cfg.n_embd;
    m.tok_emb = Tensor2(cfg.vocab_size, d);
    m.pos_emb = Tensor2(cfg.n_positions, d);
    m.layers.resize(cfg.n_layer);
    for (auto& p : m.layers) {
        p.ln1_g = Tensor2(1, d); p.ln1_b = Tensor2(1, d);
        p.w_q = Tensor2(d, d); p.b_q = Tensor2(1, d);
        p.w_k = Tensor2(d, d); p.b_k = Tensor2(1, d);
        p.w_v = Tensor2(d, d); p.b_v = Tensor2(1, d);
        p.w_o = Tensor2(d, d); p.b_o = Tensor2(1, d);
        p.ln2_g = Tensor2(1, d); p.ln2_b = Tensor2(1, d);
        p.w_fc = Tensor2(d, 4 * d); p.b_fc = Tensor2(1, 4 * d);
        p.w_proj = Tensor2(4 * d, d); p.b_proj = Tensor2(1, d);
    }
    m.lnf_g = Tensor2(1, d);
    m.lnf_b = Tensor2(1, d);
    if (cfg.classifier_head) {
        m.head_w = Tensor2(d, 2);
        m.head_b = Tensor2(1, 2);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.02);
    m.for_each_param([&](const std::string& name, Tensor2& t) {
        if (name.ends_with("_g")) {
            std::fill(t.data.begin(), t.data.end(), 1.0);
        } else if (decayable(name)) {
            for (double& v : t.data) v = dist(rng);
        }  // biases and ln shifts stay zero
    });
    return m;
}

TransformerModel TransformerModel::zeros_like(const TransformerModel& src) {
    TransformerModel z = src;
    z.for_each_param([](const std::string&, Tensor2& t) { t.zero(); });
    return z;
}

void TransformerModel::for_each_param(
    const std::function<void(const std::string&, Tensor2&)>& fn) {
    fn("tok_emb", tok_emb);
    fn("pos_emb", pos_emb);
    for (size_t l = 0; l < layers.size(); l++) {
        std::string pre = "L" + std::to_string(l) + ".";
        LayerParams& p = layers[l];
        fn(pre + "ln1_g", p.ln1_g); fn(pre + "ln1_b", p.ln1_b);
        fn(pre + "w_q", p.w_q); fn(pre + "b_q", p.b_q);
        fn(pre + "w_k", p.w_k); fn(pre + "b_k", p.b_k);
        fn(pre + "w_v", p.w_v); fn(pre + "b_v", p.b_v);
        fn(pre + "w_o", p.w_o); fn(pre + "b_o", p.b_o);
        fn(pre + "ln2_g", p.ln2_g); fn(pre + "ln2_b", p.ln2_b);
        fn(pre + "w_fc", p.w_fc); fn(pre + "b_fc", p.b_fc);
        fn(pre + "w_proj", p.w_proj); fn(pre + "b_proj", p.b_proj);
    }
    fn("lnf_g", lnf_g);
    fn("lnf_b", lnf_b);
    if (config.classifier_head) {
        fn("head_w", head_w);
        fn("head_b", head_b);
    }
}

size_t TransformerModel::param_count() const {
    size_t n = 0;
    const_cast<TransformerModel*>(this)->for_each_param(
        [&](const std::string&, Tensor2& t) { n += t.size(); });
    return n;
}

Tensor2 forward(const TransformerModel& m, const std::vector<int>& tokens,
                ForwardTrace* trace) {
    return forward_cached(m, tokens, nullptr, trace);
}

std::pair<double, int> loss_and_grad_lm(const TransformerModel& m,
                                        const std::vector<int>& tokens,
                                        int pad_id, TransformerModel& grads) {
    Cache cache;
    Tensor2 logits = forward_cached(m, tokens, &cache, nullptr);
    const int T = static_cast<int>(tokens.size());
    const int V = m.config.vocab_size;

    double loss = 0.0;
    int counted = 0;
    Tensor2 dlogits(T, V);
    for (int t = 0; t + 1 < T; t++) {
        int target = tokens[t + 1];
        if (target == pad_id || tokens[t] == pad_id) continue;
        std::vector<double> p = softmax(logits.row(t));
        loss += -std::log(std::max(p[target], 1e-300));
        counted++;
        for (int j = 0; j < V; j++) dlogits.at(t, j) = p[j];
        dlogits.at(t, target) -= 1.0;
    }
    if (counted == 0) return {0.0, 0};

    // Tied head: logits = nf @ tok_emb^T
    Tensor2 d_nf(T, m.config.n_embd);
    mm_acc(dlogits, m.tok_emb, d_nf);
    mm_At_B_acc(dlogits, cache.nf, grads.tok_emb);
    backward_stack(m, tokens, cache, std::move(d_nf), grads);
    return {loss, counted};
}

double loss_and_grad_cls(const TransformerModel& m, const std::vector<int>& tokens,
                         int label, TransformerModel& grads) {
    Cache cache;
    Tensor2 logits = forward_cached(m, tokens, &cache, nullptr);
    std::vector<double> p = softmax(logits.row(0));
    double loss = -std::log(std::max(p[label], 1e-300));

    std::vector<double> dlogit = p;
    dlogit[label] -= 1.0;
    const int d = m.config.n_embd;
    Tensor2 d_nf(static_cast<int>(tokens.size()), d);
    for (int j = 0; j < d; j++) {
        for (int c = 0; c < 2; c++) {
            grads.head_w.at(j, c) += cache.nf.at(0, j) * dlogit[c];
            d_nf.at(0, j) += dlogit[c] * m.head_w.at(j, c);
        }
    }
    grads.head_b.at(0, 0) += dlogit[0];
    grads.head_b.at(0, 1) += dlogit[1];
    backward_stack(m, tokens, cache, std::move(d_nf), grads);
    return loss;
}

AdamWState AdamWState::init(const TransformerModel& model) {
    AdamWState s;
    s.m_moment = TransformerModel::zeros_like(model);
    s.v_moment = TransformerModel::zeros_like(model);
    return s;
}

void adamw_update(TransformerModel& model, TransformerModel& grads,
                  AdamWState& state, const TrainConfig& cfg) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    state.step++;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    std::vector<Tensor2*> ps, gs, ms, vs;
    std::vector<std::string> names;
    model.for_each_param([&](const std::string& n, Tensor2& t) {
        names.push_back(n);
        ps.push_back(&t);
    });
    grads.for_each_param([&](const std::string&, Tensor2& t) { gs.push_back(&t); });
    state.m_moment.for_each_param([&](const std::string&, Tensor2& t) { ms.push_back(&t); });
    state.v_moment.for_each_param([&](const std::string&, Tensor2& t) { vs.push_back(&t); });

    for (size_t i = 0; i < ps.size(); i++) {
        const double wd = decayable(names[i]) ? cfg.weight_decay : 0.0;
        auto& p = ps[i]->data;
        auto& g = gs[i]->data;
        auto& mm = ms[i]->data;
        auto& vv = vs[i]->data;
        for (size_t j = 0; j < p.size(); j++) {
            mm[j] = b1 * mm[j] + (1.0 - b1) * g[j];
            vv[j] = b2 * vv[j] + (1.0 - b2) * g[j] * g[j];
            double mhat = mm[j] / bc1;
            double vhat = vv[j] / bc2;
            p[j] -= cfg.learning_rate * (mhat / (std::sqrt(vhat) + eps) + wd * p[j]);
        }
    }
}

double train_step_lm(TransformerModel& model, const std::vector<std::vector<int>>& batch,
                     int pad_id, AdamWState& state, const TrainConfig& cfg) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    TransformerModel grads = TransformerModel::zeros_like(model);
    double total = 0.0;
    int count = 0;
    for (const auto& seq : batch) {
        auto [l, n] = loss_and_grad_lm(model, seq, pad_id, grads);
        total += l;
        count += n;
    }
    if (count == 0) throw std::invalid_argument("batch has no trainable positions");
    double mean = total / count;
    if (!std::isfinite(mean))
        throw NonFiniteLoss("non-finite training loss: " + std::to_string(mean));
    grads.for_each_param([&](const std::string&, Tensor2& t) {
        for (double& v : t.data) v /= count;
    });
    adamw_update(model, grads, state, cfg);
    return mean;
}

double train_step_cls(TransformerModel& model, const std::vector<std::vector<int>>& batch,
                      const std::vector<int>& labels, AdamWState& state,
                      const TrainConfig& cfg) {
    if (batch.empty() || batch.size() != labels.size())
        throw std::invalid_argument("bad classifier batch");
    TransformerModel grads = TransformerModel::zeros_like(model);
    double total = 0.0;
    for (size_t i = 0; i < batch.size(); i++)
        total += loss_and_grad_cls(model, batch[i], labels[i], grads);
    double mean = total / static_cast<double>(batch.size());
    if (!std::isfinite(mean))
        throw NonFiniteLoss("non-finite training loss: " + std::to_string(mean));
    grads.for_each_param([&](const std::string&, Tensor2& t) {
        for (double& v : t.data) v /= static_cast<double>(batch.size());
    });
    adamw_update(model, grads, state, cfg);
    return mean;
}

namespace {
constexpr char kMagic[8] = {'K', 'G', 'M', 'o', 'd', 'e', 'l', '1'};

void write_i32(std::ostream& out, int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
int32_t read_i32(std::istream& in) {
    int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
}  // namespace

void save_model(std::ostream& out, const TransformerModel& m) {
    out.write(kMagic, sizeof kMagic);
    const ModelConfig& c = m.config;
    write_i32(out, c.n_embd);
    write_i32(out, c.n_layer);
    write_i32(out, c.n_head);
    write_i32(out, c.n_positions);
    write_i32(out, c.vocab_size);
    write_i32(out, c.causal ? 1 : 0);
    write_i32(out, c.classifier_head ? 1 : 0);
    const_cast<TransformerModel&>(m).for_each_param(
        [&](const std::string&, Tensor2& t) {
            out.write(reinterpret_cast<const char*>(t.data.data()),
                      static_cast<std::streamsize>(t.size() * sizeof(double)));
        });
}

TransformerModel load_model(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("bad model checkpoint header");
    ModelConfig c;
    c.n_embd = read_i32(in);
    c.n_layer = read_i32(in);
    c.n_head = read_i32(in);
    c.n_positions = read_i32(in);
    c.vocab_size = read_i32(in);
    c.causal = read_i32(in) != 0;
    c.classifier_head = read_i32(in) != 0;
    TransformerModel m = TransformerModel::init(c, 0);
    m.for_each_param([&](const std::string&, Tensor2& t) {
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
    });
    if (!in) throw std::runtime_error("truncated model checkpoint");
    return m;
}

}  // namespace ketgpt::nn
