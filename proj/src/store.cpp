#include "nextbuy/store.hpp"

#include <fstream>
#include <json.hpp>

namespace nextbuy {

using nlohmann::json;

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    Writer(const std::string& path, const char magic[8]) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw ConfigError("cannot write: " + path);
        out_.write(magic, 8);
        put_u32(kVersion);
        path_ = path;
    }
    void put_u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
    void put_u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void put_header(const json& j) {
        const std::string s = j.dump();
        put_u64(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void put_raw(const void* data, std::size_t bytes) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    }
    void put_doubles(const double* data, std::size_t n) { put_raw(data, n * sizeof(double)); }
    ~Writer() noexcept(false) {
        out_.flush();
        if (!out_) throw ConfigError("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

class Reader {
public:
    Reader(const std::string& path, const char magic[8]) : in_(path, std::ios::binary) {
        if (!in_) throw ConfigError("cannot open: " + path);
        char got[8];
        in_.read(got, 8);
        if (!in_ || std::string(got, 8) != std::string(magic, 8))
            throw SchemaError("bad file magic in " + path);
        if (get_u32() != kVersion) throw SchemaError("unsupported container version in " + path);
        path_ = path;
    }
    std::uint32_t get_u32() {
        std::uint32_t v;
        read(&v, 4);
        return v;
    }
    std::uint64_t get_u64() {
        std::uint64_t v;
        read(&v, 8);
        return v;
    }
    json get_header() {
        std::string s(get_u64(), '\0');
        read(s.data(), s.size());
        return json::parse(s);
    }
    void read(void* dst, std::size_t bytes) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
        if (!in_) throw SchemaError("truncated file: " + path_);
    }
    void get_doubles(double* dst, std::size_t n) { read(dst, n * sizeof(double)); }

private:
    std::ifstream in_;
    std::string path_;
};

FeatureGroup group_from(const std::string& s) {
    for (FeatureGroup g : {FeatureGroup::StaticCategorical, FeatureGroup::TemporalCategorical,
                           FeatureGroup::StaticContinuous, FeatureGroup::TemporalContinuous})
        if (s == feature_group_name(g)) return g;
    throw SchemaError("unknown feature group: " + s);
}

FeatureRole role_from(const std::string& s) {
    for (FeatureRole r : {FeatureRole::Entity, FeatureRole::Datetime, FeatureRole::StaticAttr,
                          FeatureRole::Profile, FeatureRole::Rolling})
        if (s == feature_role_name(r)) return r;
    throw SchemaError("unknown feature role: " + s);
}

json schema_to_json(const FeatureSchema& s) {
    json j;
    j["seq_window"] = s.seq_window;
    j["categoricals"] = json::array();
    for (const auto& c : s.categoricals)
        j["categoricals"].push_back({{"name", c.name},
                                     {"group", feature_group_name(c.group)},
                                     {"role", feature_role_name(c.role)},
                                     {"cardinality", c.cardinality}});
    j["continuous"] = json::array();
    for (const auto& c : s.continuous)
        j["continuous"].push_back({{"name", c.name},
                                   {"group", feature_group_name(c.group)},
                                   {"role", feature_role_name(c.role)}});
    j["seq_channels"] = json::array();
    for (const auto& c : s.seq_channels)
        j["seq_channels"].push_back({{"name", c.name}, {"shift", c.shift}});
    return j;
}

FeatureSchema schema_from_json(const json& j) {
    FeatureSchema s;
    s.seq_window = j.at("seq_window").get<int>();
    for (const auto& c : j.at("categoricals"))
        s.categoricals.push_back({c.at("name").get<std::string>(),
                                  group_from(c.at("group").get<std::string>()),
                                  role_from(c.at("role").get<std::string>()),
                                  c.at("cardinality").get<int>()});
    for (const auto& c : j.at("continuous"))
        s.continuous.push_back({c.at("name").get<std::string>(),
                                group_from(c.at("group").get<std::string>()),
                                role_from(c.at("role").get<std::string>()), 0.0, 0.0});
    for (const auto& c : j.at("seq_channels"))
        s.seq_channels.push_back({c.at("name").get<std::string>(), c.at("shift").get<int>(), 0.0, 0.0});
    return s;
}

}  // namespace

// ----------------------------------------------------------------------------
// Panel container
// ----------------------------------------------------------------------------

void save_panel(const SplitPanel& panel, const std::string& path) {
    Writer w(path, "NXB.PANL");
    json h;
    h["week0_days"] = panel.weeks.week0_start.days;
    h["n_weeks"] = panel.weeks.n_weeks;
    h["cfg"] = {panel.cfg.train_weeks, panel.cfg.validation_weeks, panel.cfg.test1_weeks,
                panel.cfg.test2_weeks};
    h["lo"] = panel.lo;
    h["hi"] = panel.hi;
    h["relevant_pairs"] = panel.relevant_pairs;
    h["n_series"] = panel.series.size();
    json rows = json::array();
    for (const auto& r : panel.rows) rows.push_back(r.size());
    h["rows"] = rows;
    w.put_header(h);

    for (const auto& s : panel.series) {
        w.put_u32(s.consumer);
        w.put_u32(s.item);
        w.put_u32(static_cast<std::uint32_t>(s.first_week));
        w.put_u32(static_cast<std::uint32_t>(s.labels.size()));
        w.put_raw(s.labels.data(), s.labels.size());
    }
    for (const auto& rows_s : panel.rows) {
        for (const PanelRow& r : rows_s) {
            w.put_u32(r.series);
            w.put_u32(r.week);
            w.put_u32(r.label);
        }
    }
}

SplitPanel load_panel(const std::string& path) {
    Reader rd(path, "NXB.PANL");
    json h = rd.get_header();
    SplitPanel p;
    p.weeks.week0_start = Date{h.at("week0_days").get<std::int64_t>()};
    p.weeks.n_weeks = h.at("n_weeks").get<int>();
    auto cfg = h.at("cfg");
    p.cfg = {cfg[0].get<int>(), cfg[1].get<int>(), cfg[2].get<int>(), cfg[3].get<int>()};
    for (int i = 0; i < kSplitCount; ++i) {
        p.lo[static_cast<std::size_t>(i)] = h.at("lo")[static_cast<std::size_t>(i)].get<int>();
        p.hi[static_cast<std::size_t>(i)] = h.at("hi")[static_cast<std::size_t>(i)].get<int>();
        p.relevant_pairs[static_cast<std::size_t>(i)] =
            h.at("relevant_pairs")[static_cast<std::size_t>(i)].get<std::size_t>();
    }
    const auto n_series = h.at("n_series").get<std::size_t>();
    p.series.resize(n_series);
    for (auto& s : p.series) {
        s.consumer = rd.get_u32();
        s.item = rd.get_u32();
        s.first_week = static_cast<int>(rd.get_u32());
        s.labels.resize(rd.get_u32());
        rd.read(s.labels.data(), s.labels.size());
    }
    for (int i = 0; i < kSplitCount; ++i) {
        p.rows[static_cast<std::size_t>(i)].resize(
            h.at("rows")[static_cast<std::size_t>(i)].get<std::size_t>());
        for (PanelRow& r : p.rows[static_cast<std::size_t>(i)]) {
            r.series = rd.get_u32();
            r.week = static_cast<std::uint16_t>(rd.get_u32());
            r.label = static_cast<std::uint8_t>(rd.get_u32());
        }
    }
    return p;
}

// ----------------------------------------------------------------------------
// Feature container
// ----------------------------------------------------------------------------

void save_features(const FeatureBundle& bundle, const std::string& path) {
    Writer w(path, "NXB.FEAT");
    json h;
    h["schema"] = schema_to_json(bundle.schema);
    h["schema_hash"] = hash_hex(bundle.schema.hash());
    json rows = json::array();
    for (const auto& m : bundle.splits) rows.push_back(static_cast<std::size_t>(m.n()));
    h["rows"] = rows;
    h["n_series"] = bundle.seq.per_series.size();
    h["n_weeks"] = bundle.seq.n_weeks;
    w.put_header(h);

    // standardization stats as raw doubles so round-trips stay bit-exact
    for (const auto& c : bundle.schema.continuous) {
        w.put_doubles(&c.mean, 1);
        w.put_doubles(&c.stddev, 1);
    }
    for (const auto& c : bundle.schema.seq_channels) {
        w.put_doubles(&c.mean, 1);
        w.put_doubles(&c.stddev, 1);
    }
    for (const auto& m : bundle.splits) {
        for (const RowKey& k : m.keys) {
            w.put_u32(k.series);
            w.put_u32(k.consumer);
            w.put_u32(k.item);
            w.put_u32(k.week);
        }
        std::vector<std::int32_t> cats(static_cast<std::size_t>(m.cats.size()));
        for (Eigen::Index r = 0; r < m.cats.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cats.cols(); ++c)
                cats[static_cast<std::size_t>(r * m.cats.cols() + c)] = m.cats(r, c);
        w.put_raw(cats.data(), cats.size() * 4);
        w.put_doubles(m.cont.data(), static_cast<std::size_t>(m.cont.size()));
        w.put_doubles(m.labels.data(), static_cast<std::size_t>(m.labels.size()));
    }
    for (const auto& s : bundle.seq.per_series)
        w.put_doubles(s.data(), static_cast<std::size_t>(s.size()));
}

FeatureBundle load_features(const std::string& path) {
    Reader rd(path, "NXB.FEAT");
    json h = rd.get_header();
    FeatureBundle b;
    b.schema = schema_from_json(h.at("schema"));
    for (auto& c : b.schema.continuous) {
        rd.get_doubles(&c.mean, 1);
        rd.get_doubles(&c.stddev, 1);
    }
    for (auto& c : b.schema.seq_channels) {
        rd.get_doubles(&c.mean, 1);
        rd.get_doubles(&c.stddev, 1);
    }
    const int n_cat = static_cast<int>(b.schema.categoricals.size());
    const int n_cont = static_cast<int>(b.schema.continuous.size());
    for (int i = 0; i < kSplitCount; ++i) {
        FeatureMatrix& m = b.splits[static_cast<std::size_t>(i)];
        m.split = split_name(static_cast<Split>(i));
        const auto n = h.at("rows")[static_cast<std::size_t>(i)].get<std::size_t>();
        m.keys.resize(n);
        for (RowKey& k : m.keys) {
            k.series = rd.get_u32();
            k.consumer = rd.get_u32();
            k.item = rd.get_u32();
            k.week = static_cast<std::uint16_t>(rd.get_u32());
        }
        m.cats.resize(static_cast<Eigen::Index>(n), n_cat);
        std::vector<std::int32_t> cats(n * static_cast<std::size_t>(n_cat));
        rd.read(cats.data(), cats.size() * 4);
        for (Eigen::Index r = 0; r < m.cats.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cats.cols(); ++c)
                m.cats(r, c) = cats[static_cast<std::size_t>(r * n_cat + c)];
        m.cont.resize(static_cast<Eigen::Index>(n), n_cont);
        rd.get_doubles(m.cont.data(), static_cast<std::size_t>(m.cont.size()));
        m.labels.resize(static_cast<Eigen::Index>(n));
        rd.get_doubles(m.labels.data(), static_cast<std::size_t>(m.labels.size()));
    }
    b.seq.n_weeks = h.at("n_weeks").get<int>();
    b.seq.window = b.schema.seq_window;
    for (const auto& c : b.schema.seq_channels) b.seq.shifts.push_back(c.shift);
    b.seq.per_series.resize(h.at("n_series").get<std::size_t>());
    for (auto& s : b.seq.per_series) {
        s.resize(static_cast<Eigen::Index>(b.schema.seq_channels.size()), b.seq.n_weeks);
        rd.get_doubles(s.data(), static_cast<std::size_t>(s.size()));
    }
    return b;
}

// ----------------------------------------------------------------------------
// Checkpoints and flat arrays
// ----------------------------------------------------------------------------

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    Writer w(path, "NXB.CKPT");
    json h;
    h["arch"] = ckpt.arch;
    h["config"] = ckpt.config_json;
    h["schema_hash"] = hash_hex(ckpt.schema_hash);
    json params = json::array();
    for (const auto& [name, m] : ckpt.params)
        params.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    h["params"] = params;
    w.put_header(h);
    w.put_doubles(&ckpt.val_loss, 1);
    for (const auto& [name, m] : ckpt.params)
        w.put_doubles(m.data(), static_cast<std::size_t>(m.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader rd(path, "NXB.CKPT");
    json h = rd.get_header();
    Checkpoint c;
    c.arch = h.at("arch").get<std::string>();
    c.config_json = h.at("config").get<std::string>();
    c.schema_hash = std::stoull(h.at("schema_hash").get<std::string>(), nullptr, 16);
    rd.get_doubles(&c.val_loss, 1);
    for (const auto& p : h.at("params")) {
        Eigen::MatrixXd m(p.at("rows").get<Eigen::Index>(), p.at("cols").get<Eigen::Index>());
        rd.get_doubles(m.data(), static_cast<std::size_t>(m.size()));
        c.params.emplace_back(p.at("name").get<std::string>(), std::move(m));
    }
    return c;
}

void save_vector(const Eigen::VectorXd& v, const std::string& path) {
    Writer w(path, "NXB.VECD");
    json h;
    h["n"] = static_cast<std::size_t>(v.size());
    w.put_header(h);
    w.put_doubles(v.data(), static_cast<std::size_t>(v.size()));
}

Eigen::VectorXd load_vector(const std::string& path) {
    Reader rd(path, "NXB.VECD");
    json h = rd.get_header();
    Eigen::VectorXd v(h.at("n").get<Eigen::Index>());
    rd.get_doubles(v.data(), static_cast<std::size_t>(v.size()));
    return v;
}

void save_bytes(const std::vector<std::uint8_t>& v, const std::string& path) {
    Writer w(path, "NXB.PRED");
    json h;
    h["n"] = v.size();
    w.put_header(h);
    w.put_raw(v.data(), v.size());
}

std::vector<std::uint8_t> load_bytes(const std::string& path) {
    Reader rd(path, "NXB.PRED");
    json h = rd.get_header();
    std::vector<std::uint8_t> v(h.at("n").get<std::size_t>());
    rd.read(v.data(), v.size());
    return v;
}

}  // namespace nextbuy
