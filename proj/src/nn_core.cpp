#include "nextbuy/nn/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nextbuy::nn {

// ----------------------------------------------------------------------------
// Parameter plumbing
// ----------------------------------------------------------------------------

Vec flatten(const std::vector<ParamRef>& params) {
    std::size_t total = 0;
    for (const auto& p : params) total += static_cast<std::size_t>(p.value->size());
    Vec out(static_cast<Eigen::Index>(total));
    Eigen::Index at = 0;
    for (const auto& p : params) {
        out.segment(at, p.value->size()) =
            Eigen::Map<const Vec>(p.value->data(), p.value->size());
        at += p.value->size();
    }
    return out;
}

void unflatten(std::vector<ParamRef>& params, const Vec& flat) {
    Eigen::Index at = 0;
    for (auto& p : params) {
        if (at + p.value->size() > flat.size())
            throw ContractError("unflatten: parameter vector too short");
        Eigen::Map<Vec>(p.value->data(), p.value->size()) = flat.segment(at, p.value->size());
        at += p.value->size();
    }
    if (at != flat.size()) throw ContractError("unflatten: parameter vector size mismatch");
}

std::size_t param_count(const std::vector<ParamRef>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += static_cast<std::size_t>(p.value->size());
    return n;
}

// ----------------------------------------------------------------------------
// Loss
// ----------------------------------------------------------------------------

double bce_loss(const Vec& probs, const Vec& labels) {
    if (probs.size() == 0) throw ContractError("bce_loss: empty input");
    if (probs.size() != labels.size()) throw ContractError("bce_loss: length mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], kProbEps, 1.0 - kProbEps);
        const double y = labels[i];
        sum += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(probs.size());
}

// ----------------------------------------------------------------------------
// Layers
// ----------------------------------------------------------------------------

Dense::Dense(std::string name, int in, int out, Rng& rng) : name_(std::move(name)) {
    const double a = std::sqrt(6.0 / (in + out));
    weight.resize(in, out);
    for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = rng.uniform(-a, a);
    bias = Mat::Zero(1, out);
    d_weight = Mat::Zero(in, out);
    d_bias = Mat::Zero(1, out);
}

Mat Dense::forward(const Mat& x) {
    x_cache_ = x;
    return (x * weight).rowwise() + bias.row(0);
}

Mat Dense::backward(const Mat& d_out) {
    d_weight += x_cache_.transpose() * d_out;
    d_bias.row(0) += d_out.colwise().sum();
    return d_out * weight.transpose();
}

void Dense::collect(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".weight", &weight, &d_weight});
    out.push_back({name_ + ".bias", &bias, &d_bias});
}

Mat Relu::forward(const Mat& x) {
    mask = (x.array() > 0.0).cast<double>();
    return x.cwiseProduct(mask);
}

Mat Relu::backward(const Mat& d_out) const { return d_out.cwiseProduct(mask); }

Mat Dropout::forward(const Mat& x, bool train, std::uint64_t salt) {
    if (!train || p <= 0.0) {
        mask = Mat();
        return x;
    }
    const double keep = 1.0 - p;
    mask.resize(x.rows(), x.cols());
    const std::uint64_t stream = splitmix64(salt ^ (0xD0D0ULL + static_cast<std::uint64_t>(tag)));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const std::uint64_t h = splitmix64(
                stream ^ (static_cast<std::uint64_t>(r) * 0x100000001B3ULL +
                          static_cast<std::uint64_t>(c)));
            const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
            mask(r, c) = u < p ? 0.0 : 1.0 / keep;
        }
    }
    return x.cwiseProduct(mask);
}

Mat Dropout::backward(const Mat& d_out) const {
    if (mask.size() == 0) return d_out;
    return d_out.cwiseProduct(mask);
}

EmbeddingTable::EmbeddingTable(std::string name, int cardinality, int dim, Rng& rng)
    : name_(std::move(name)) {
    weight.resize(cardinality, dim);
    for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = rng.uniform(-0.05, 0.05);
    d_weight = Mat::Zero(cardinality, dim);
}

Mat EmbeddingTable::forward(const Eigen::Ref<const Eigen::VectorXi>& codes) {
    codes_cache_ = codes;
    Mat out(codes.size(), weight.cols());
    for (Eigen::Index r = 0; r < codes.size(); ++r) {
        const int code = codes[r];
        if (code < 0 || code >= weight.rows())
            throw ContractError(name_ + ": code " + std::to_string(code) +
                                " out of range (cardinality " + std::to_string(weight.rows()) +
                                ")");
        out.row(r) = weight.row(code);
    }
    return out;
}

void EmbeddingTable::backward(const Mat& d_out) {
    for (Eigen::Index r = 0; r < codes_cache_.size(); ++r)
        d_weight.row(codes_cache_[r]) += d_out.row(r);
}

void EmbeddingTable::collect(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".weight", &weight, &d_weight});
}

CausalConv::CausalConv(std::string name, int in_ch, int out_ch, int k, int d, Rng& rng)
    : kernel(k), dilation(d), name_(std::move(name)) {
    const double a = std::sqrt(6.0 / (k * in_ch + out_ch));
    taps.resize(static_cast<std::size_t>(k));
    d_taps.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        taps[static_cast<std::size_t>(j)].resize(in_ch, out_ch);
        for (Eigen::Index i = 0; i < taps[static_cast<std::size_t>(j)].size(); ++i)
            taps[static_cast<std::size_t>(j)].data()[i] = rng.uniform(-a, a);
        d_taps[static_cast<std::size_t>(j)] = Mat::Zero(in_ch, out_ch);
    }
    bias = Mat::Zero(1, out_ch);
    d_bias = Mat::Zero(1, out_ch);
}

Mat CausalConv::forward_at(const std::map<int, Mat>& input, int pos) const {
    const Eigen::Index batch = input.begin()->second.rows();
    Mat out = bias.row(0).colwise().replicate(batch);
    for (int j = 0; j < kernel; ++j) {
        const int src = pos - j * dilation;
        auto it = input.find(src);
        if (it == input.end()) continue;  // implicit zero padding
        out.noalias() += it->second * taps[static_cast<std::size_t>(j)];
    }
    return out;
}

void CausalConv::backward_at(const std::map<int, Mat>& input, int pos, const Mat& d_pre,
                             std::map<int, Mat>& d_input) const {
    d_bias.row(0) += d_pre.colwise().sum();
    for (int j = 0; j < kernel; ++j) {
        const int src = pos - j * dilation;
        auto it = input.find(src);
        if (it == input.end()) continue;
        d_taps[static_cast<std::size_t>(j)].noalias() += it->second.transpose() * d_pre;
        auto [dit, inserted] = d_input.try_emplace(
            src, Mat::Zero(d_pre.rows(), taps[static_cast<std::size_t>(j)].rows()));
        dit->second.noalias() += d_pre * taps[static_cast<std::size_t>(j)].transpose();
    }
}

void CausalConv::collect(std::vector<ParamRef>& out) {
    for (int j = 0; j < kernel; ++j)
        out.push_back({name_ + ".tap" + std::to_string(j), &taps[static_cast<std::size_t>(j)],
                       &d_taps[static_cast<std::size_t>(j)]});
    out.push_back({name_ + ".bias", &bias, &d_bias});
}

// ----------------------------------------------------------------------------
// Shared network scaffolding
// ----------------------------------------------------------------------------

int embedding_dim(int cardinality, int max_dim) {
    return std::min(max_dim, (cardinality + 2) / 2);
}

namespace {

struct SigmoidOut {
    /// Raw sigmoid cached for the clamp-aware gradient.
    Vec raw;
    Vec forward(const Mat& z) {
        raw.resize(z.rows());
        for (Eigen::Index i = 0; i < z.rows(); ++i)
            raw[i] = 1.0 / (1.0 + std::exp(-z(i, 0)));
        Vec p = raw;
        for (Eigen::Index i = 0; i < p.size(); ++i)
            p[i] = std::clamp(p[i], kProbEps, 1.0 - kProbEps);
        return p;
    }
    /// d(mean BCE)/dz; zero where the clamp is active.
    Mat backward(const Vec& labels) const {
        Mat dz(raw.size(), 1);
        const double inv_n = 1.0 / static_cast<double>(raw.size());
        for (Eigen::Index i = 0; i < raw.size(); ++i) {
            const bool clamped = raw[i] < kProbEps || raw[i] > 1.0 - kProbEps;
            dz(i, 0) = clamped ? 0.0 : (raw[i] - labels[i]) * inv_n;
        }
        return dz;
    }
};

class FcHead {
public:
    FcHead() = default;
    FcHead(int in, const std::array<int, 3>& hidden, double dropout, Rng& rng) {
        fc_[0] = Dense("fc1", in, hidden[0], rng);
        fc_[1] = Dense("fc2", hidden[0], hidden[1], rng);
        fc_[2] = Dense("fc3", hidden[1], hidden[2], rng);
        out_ = Dense("out", hidden[2], 1, rng);
        for (int i = 0; i < 3; ++i) {
            drop_[i].p = dropout;
            drop_[i].tag = i + 1;
        }
    }

    Vec forward(const Mat& x, bool train, std::uint64_t salt) {
        Mat h = x;
        for (int i = 0; i < 3; ++i) {
            h = fc_[i].forward(h);
            h = relu_[i].forward(h);
            h = drop_[i].forward(h, train, salt);
        }
        return sig_.forward(out_.forward(h));
    }

    /// Returns d(loss)/d(head input).
    Mat backward(const Vec& labels) {
        Mat d = out_.backward(sig_.backward(labels));
        for (int i = 2; i >= 0; --i) {
            d = drop_[i].backward(d);
            d = relu_[i].backward(d);
            d = fc_[i].backward(d);
        }
        return d;
    }

    void collect(std::vector<ParamRef>& out) {
        for (int i = 0; i < 3; ++i) fc_[i].collect(out);
        out_.collect(out);
    }

private:
    std::array<Dense, 3> fc_;
    std::array<Relu, 3> relu_;
    std::array<Dropout, 3> drop_;
    Dense out_;
    SigmoidOut sig_;
};

class NetBase : public Net {
public:
    std::vector<ParamRef> params() override {
        std::vector<ParamRef> out;
        for (auto& e : embeddings_) e.collect(out);
        collect_extra(out);
        head_.collect(out);
        return out;
    }

protected:
    void build_embeddings(const FeatureSchema& schema, int max_dim, Rng& rng) {
        embed_total_ = 0;
        for (const auto& c : schema.categoricals) {
            const int dim = embedding_dim(c.cardinality, max_dim);
            embeddings_.emplace_back("embed." + c.name, c.cardinality, dim, rng);
            embed_total_ += dim;
        }
        n_cat_ = static_cast<int>(schema.categoricals.size());
    }

    Mat embed_forward(const Batch& batch) {
        if (batch.cats.cols() != n_cat_)
            throw ContractError(std::string(arch()) + ": batch has " +
                                std::to_string(batch.cats.cols()) + " categorical columns, model expects " +
                                std::to_string(n_cat_));
        Mat out(batch.size(), embed_total_);
        Eigen::Index off = 0;
        for (std::size_t k = 0; k < embeddings_.size(); ++k) {
            out.middleCols(off, embeddings_[k].dim()) =
                embeddings_[k].forward(batch.cats.col(static_cast<Eigen::Index>(k)));
            off += embeddings_[k].dim();
        }
        return out;
    }

    void embed_backward(const Mat& d_embed) {
        Eigen::Index off = 0;
        for (auto& e : embeddings_) {
            e.backward(d_embed.middleCols(off, e.dim()));
            off += e.dim();
        }
    }

    void zero_grads() {
        for (auto& p : params()) p.grad->setZero();
    }

    /// BCE + 0.5 * wd * |theta|^2; gradients get the matching wd * theta.
    double apply_weight_decay(double data_loss) {
        double sq = 0.0;
        for (auto& p : params()) {
            sq += p.value->squaredNorm();
            *p.grad += weight_decay * *p.value;
        }
        return data_loss + 0.5 * weight_decay * sq;
    }

    virtual void collect_extra(std::vector<ParamRef>& out) = 0;

    std::vector<EmbeddingTable> embeddings_;
    FcHead head_;
    int embed_total_ = 0;
    int n_cat_ = 0;
};

class MlpNet : public NetBase {
public:
    MlpNet(const FeatureSchema& schema, const MlpSpec& spec, std::uint64_t seed) {
        Rng rng(seed);
        build_embeddings(schema, spec.max_embed_dim, rng);
        n_cont_ = static_cast<int>(schema.continuous.size());
        head_ = FcHead(embed_total_ + n_cont_, spec.hidden, spec.dropout, rng);
    }

    const char* arch() const override { return "mlp"; }

    Vec forward(const Batch& batch, bool train, std::uint64_t salt) override {
        if (batch.cont.cols() != n_cont_)
            throw ContractError("mlp: continuous column count mismatch");
        Mat x(batch.size(), embed_total_ + n_cont_);
        x.leftCols(embed_total_) = embed_forward(batch);
        x.rightCols(n_cont_) = batch.cont;
        return head_.forward(x, train, salt);
    }

    double loss_and_grad(const Batch& batch, bool train, std::uint64_t salt) override {
        zero_grads();
        const Vec p = forward(batch, train, salt);
        const double loss = bce_loss(p, batch.labels);
        const Mat dx = head_.backward(batch.labels);
        embed_backward(dx.leftCols(embed_total_));
        return apply_weight_decay(loss);
    }

protected:
    void collect_extra(std::vector<ParamRef>&) override {}

private:
    int n_cont_ = 0;
};

class TcnNet : public NetBase {
public:
    TcnNet(const FeatureSchema& schema, const TcnSpec& spec, std::uint64_t seed) : spec_(spec) {
        Rng rng(seed);
        build_embeddings(schema, spec.max_embed_dim, rng);
        cont_cols_ = tcn_cont_columns(schema);
        n_cont_all_ = static_cast<int>(schema.continuous.size());
        n_seq_ch_ = static_cast<int>(schema.seq_channels.size());

        window_ = 1 + (spec.kernel - 1) * (spec.dilations[0] + spec.dilations[1] +
                                           spec.dilations[2]);
        conv_[0] = CausalConv("conv1", n_seq_ch_, spec.channels[0], spec.kernel,
                              spec.dilations[0], rng);
        conv_[1] = CausalConv("conv2", spec.channels[0], spec.channels[1], spec.kernel,
                              spec.dilations[1], rng);
        conv_[2] = CausalConv("conv3", spec.channels[1], spec.channels[2], spec.kernel,
                              spec.dilations[2], rng);

        // Only positions feeding the final output are evaluated; the sparse
        // sets below walk the dilation tree backwards from the last position.
        pos_[2] = {window_ - 1};
        pos_[1] = expand(pos_[2], spec.dilations[2], spec.kernel);
        pos_[0] = expand(pos_[1], spec.dilations[1], spec.kernel);

        head_ = FcHead(spec.channels[2] + embed_total_ + static_cast<int>(cont_cols_.size()),
                       spec.head, spec.dropout, rng);
    }

    const char* arch() const override { return "tcn"; }
    int seq_window() const override { return window_; }

    Vec forward(const Batch& batch, bool train, std::uint64_t salt) override {
        if (batch.cont.cols() != n_cont_all_)
            throw ContractError("tcn: continuous column count mismatch");
        if (static_cast<int>(batch.seq.size()) != window_)
            throw ContractError("tcn: expected a trailing window of " +
                                std::to_string(window_) + " positions, got " +
                                std::to_string(batch.seq.size()));

        in_.clear();
        for (int t = 0; t < window_; ++t) {
            if (batch.seq[static_cast<std::size_t>(t)].cols() != n_seq_ch_)
                throw ContractError("tcn: sequence channel count mismatch");
            in_[t] = batch.seq[static_cast<std::size_t>(t)];
        }
        for (int layer = 0; layer < 3; ++layer) {
            const std::map<int, Mat>& src = layer == 0 ? in_ : act_[static_cast<std::size_t>(layer - 1)];
            pre_[static_cast<std::size_t>(layer)].clear();
            act_[static_cast<std::size_t>(layer)].clear();
            for (int p : pos_[static_cast<std::size_t>(layer)]) {
                Mat z = conv_[static_cast<std::size_t>(layer)].forward_at(src, p);
                pre_[static_cast<std::size_t>(layer)][p] = z;
                act_[static_cast<std::size_t>(layer)][p] = z.cwiseMax(0.0);
            }
        }
        const Mat& a3 = act_[2].at(window_ - 1);

        Mat x(batch.size(), a3.cols() + embed_total_ + static_cast<Eigen::Index>(cont_cols_.size()));
        x.leftCols(a3.cols()) = a3;
        x.middleCols(a3.cols(), embed_total_) = embed_forward(batch);
        for (std::size_t j = 0; j < cont_cols_.size(); ++j)
            x.col(a3.cols() + embed_total_ + static_cast<Eigen::Index>(j)) =
                batch.cont.col(cont_cols_[j]);
        return head_.forward(x, train, salt);
    }

    double loss_and_grad(const Batch& batch, bool train, std::uint64_t salt) override {
        zero_grads();
        const Vec p = forward(batch, train, salt);
        const double loss = bce_loss(p, batch.labels);
        const Mat dx = head_.backward(batch.labels);

        const Eigen::Index c3 = conv_[2].bias.cols();
        embed_backward(dx.middleCols(c3, embed_total_));

        std::map<int, Mat> d_act;  // gradient w.r.t. the current layer's activations
        d_act[window_ - 1] = dx.leftCols(c3);
        for (int layer = 2; layer >= 0; --layer) {
            const std::map<int, Mat>& src =
                layer == 0 ? in_ : act_[static_cast<std::size_t>(layer - 1)];
            std::map<int, Mat> d_src;
            for (auto& [p, da] : d_act) {
                const Mat& z = pre_[static_cast<std::size_t>(layer)].at(p);
                const Mat dz = da.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
                conv_[static_cast<std::size_t>(layer)].backward_at(src, p, dz, d_src);
            }
            d_act = std::move(d_src);
        }
        return apply_weight_decay(loss);
    }

protected:
    void collect_extra(std::vector<ParamRef>& out) override {
        for (auto& c : conv_) c.collect(out);
    }

private:
    static std::vector<int> expand(const std::vector<int>& positions, int dilation, int kernel) {
        std::set<int> s;
        for (int p : positions)
            for (int j = 0; j < kernel; ++j)
                if (p - j * dilation >= 0) s.insert(p - j * dilation);
        return {s.begin(), s.end()};
    }

    TcnSpec spec_;
    std::vector<int> cont_cols_;
    int n_cont_all_ = 0;
    int n_seq_ch_ = 0;
    int window_ = 0;
    std::array<CausalConv, 3> conv_;
    std::array<std::vector<int>, 3> pos_;
    std::map<int, Mat> in_;
    std::array<std::map<int, Mat>, 3> pre_, act_;
};

}  // namespace

std::vector<int> tcn_cont_columns(const FeatureSchema& schema) {
    std::vector<int> cols;
    for (std::size_t i = 0; i < schema.continuous.size(); ++i)
        if (schema.continuous[i].role != FeatureRole::Rolling)
            cols.push_back(static_cast<int>(i));
    return cols;
}

std::unique_ptr<Net> make_mlp(const FeatureSchema& schema, const MlpSpec& spec,
                              std::uint64_t seed) {
    return std::make_unique<MlpNet>(schema, spec, seed);
}

std::unique_ptr<Net> make_tcn(const FeatureSchema& schema, const TcnSpec& spec,
                              std::uint64_t seed) {
    return std::make_unique<TcnNet>(schema, spec, seed);
}

std::unique_ptr<Net> make_net(const std::string& arch, const FeatureSchema& schema,
                              std::uint64_t seed) {
    if (arch == "mlp") return make_mlp(schema, MlpSpec{}, seed);
    if (arch == "tcn") return make_tcn(schema, TcnSpec{}, seed);
    throw ConfigError("unknown architecture: " + arch);
}

}  // namespace nextbuy::nn
