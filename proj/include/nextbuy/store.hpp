#ifndef NEXTBUY_STORE_HPP
#define NEXTBUY_STORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nextbuy/features.hpp"
#include "nextbuy/panel.hpp"

namespace nextbuy {

// Versioned binary containers: an 8-byte magic, a format version, a JSON
// header, then raw little-endian blocks. Round-trips are bit-exact.

void save_panel(const SplitPanel& panel, const std::string& path);
SplitPanel load_panel(const std::string& path);

void save_features(const FeatureBundle& bundle, const std::string& path);
FeatureBundle load_features(const std::string& path);

struct Checkpoint {
    std::string arch;
    std::string config_json;
    std::uint64_t schema_hash = 0;
    double val_loss = 0.0;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void save_vector(const Eigen::VectorXd& v, const std::string& path);
Eigen::VectorXd load_vector(const std::string& path);

void save_bytes(const std::vector<std::uint8_t>& v, const std::string& path);
std::vector<std::uint8_t> load_bytes(const std::string& path);

}  // namespace nextbuy

#endif
