#ifndef NEXTBUY_NN_CORE_HPP
#define NEXTBUY_NN_CORE_HPP

#include <Eigen/Dense>
#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nextbuy/common.hpp"
#include "nextbuy/features.hpp"

namespace nextbuy::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Named view of one parameter tensor and its gradient accumulator.
struct ParamRef {
    std::string name;
    Mat* value;
    Mat* grad;
};

Vec flatten(const std::vector<ParamRef>& params);
void unflatten(std::vector<ParamRef>& params, const Vec& flat);
std::size_t param_count(const std::vector<ParamRef>& params);

/// One mini-batch of feature rows. `seq` holds the trailing temporal window
/// for sequence models: seq_window entries of (batch x channels), oldest
/// position first.
struct Batch {
    Eigen::MatrixXi cats;
    Mat cont;
    std::vector<Mat> seq;
    Vec labels;

    Eigen::Index size() const { return cont.rows(); }
};

// ============================================================================
// Loss
// ============================================================================

constexpr double kProbEps = 1e-7;  // probabilities clamped to [eps, 1-eps]

/// Mean binary cross-entropy; inputs clamped away from {0,1} before the log.
double bce_loss(const Vec& probs, const Vec& labels);

// ============================================================================
// Layers
// ============================================================================

class Dense {
public:
    Dense() = default;
    Dense(std::string name, int in, int out, Rng& rng);

    Mat forward(const Mat& x);
    /// Returns d(loss)/d(input); accumulates weight/bias gradients.
    Mat backward(const Mat& d_out);
    void collect(std::vector<ParamRef>& out);

    Mat weight, bias;  // bias is 1 x out
    Mat d_weight, d_bias;

private:
    std::string name_;
    Mat x_cache_;
};

struct Relu {
    Mat forward(const Mat& x);
    Mat backward(const Mat& d_out) const;
    Mat mask;
};

/// Inverted dropout with a counter-based deterministic mask: the mask is a
/// pure function of (salt, tag, row, column), so a forward pass can be
/// replayed exactly by passing the same salt.
struct Dropout {
    double p = 0.0;
    int tag = 0;
    Mat mask;

    Mat forward(const Mat& x, bool train, std::uint64_t salt);
    Mat backward(const Mat& d_out) const;
};

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    /// Row 0 is the reserved unknown level.
    EmbeddingTable(std::string name, int cardinality, int dim, Rng& rng);

    Mat forward(const Eigen::Ref<const Eigen::VectorXi>& codes);
    void backward(const Mat& d_out);
    void collect(std::vector<ParamRef>& out);
    int dim() const { return static_cast<int>(weight.cols()); }
    int cardinality() const { return static_cast<int>(weight.rows()); }

    Mat weight, d_weight;

private:
    std::string name_;
    Eigen::VectorXi codes_cache_;
};

/// Dilated causal convolution over a per-position activation map. Tap j of
/// the kernel reads position p - j*dilation; positions before the window are
/// implicit zeros, so position t never sees anything later than t.
class CausalConv {
public:
    CausalConv() = default;
    CausalConv(std::string name, int in_ch, int out_ch, int kernel, int dilation, Rng& rng);

    /// Pre-activation output at `pos` given available input positions.
    Mat forward_at(const std::map<int, Mat>& input, int pos) const;
    /// Accumulates parameter gradients and scatters input gradients.
    void backward_at(const std::map<int, Mat>& input, int pos, const Mat& d_pre,
                     std::map<int, Mat>& d_input) const;
    void collect(std::vector<ParamRef>& out);

    int kernel = 3;
    int dilation = 1;
    std::vector<Mat> taps;  // kernel entries, in_ch x out_ch
    Mat bias;               // 1 x out_ch
    mutable std::vector<Mat> d_taps;
    mutable Mat d_bias;

private:
    std::string name_;
};

// ============================================================================
// Networks
// ============================================================================

struct MlpSpec {
    std::array<int, 3> hidden = {128, 64, 32};
    double dropout = 0.1;
    int max_embed_dim = 50;
};

struct TcnSpec {
    std::array<int, 3> channels = {32, 32, 32};
    int kernel = 3;
    std::array<int, 3> dilations = {1, 2, 4};
    std::array<int, 3> head = {64, 32, 16};
    double dropout = 0.1;
    int max_embed_dim = 50;
};

/// min(max_dim, ceil((cardinality + 1) / 2))
int embedding_dim(int cardinality, int max_dim);

/// Differentiable binary classifier over a FeatureSchema. loss_and_grad
/// computes mean BCE plus an L2 weight-decay term and fills every parameter
/// gradient (embeddings included).
class Net {
public:
    virtual ~Net() = default;

    virtual Vec forward(const Batch& batch, bool train, std::uint64_t mask_salt) = 0;
    virtual double loss_and_grad(const Batch& batch, bool train, std::uint64_t mask_salt) = 0;
    virtual std::vector<ParamRef> params() = 0;
    virtual const char* arch() const = 0;
    virtual int seq_window() const { return 0; }

    double weight_decay = 1e-5;
};

std::unique_ptr<Net> make_mlp(const FeatureSchema& schema, const MlpSpec& spec,
                              std::uint64_t seed);
std::unique_ptr<Net> make_tcn(const FeatureSchema& schema, const TcnSpec& spec,
                              std::uint64_t seed);
std::unique_ptr<Net> make_net(const std::string& arch, const FeatureSchema& schema,
                              std::uint64_t seed);

/// Continuous columns a sequence model consumes directly (everything except
/// the lagged rolling block, which the convolution replaces).
std::vector<int> tcn_cont_columns(const FeatureSchema& schema);

}  // namespace nextbuy::nn

#endif
