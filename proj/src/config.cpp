#include "dcinject/config.hpp"

#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dcinject/rng.hpp"

namespace dcinject {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

class KvReader {
public:
    explicit KvReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::optional<std::string> take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        std::string v = it->second;
        kv_.erase(it);
        return v;
    }

    void take_string(const std::string& key, std::string& dst) {
        if (auto v = take(key)) dst = *v;
    }

    void take_u64(const std::string& key, std::uint64_t& dst) {
        if (auto v = take(key)) dst = parse_u64(key, *v);
    }

    void take_int(const std::string& key, int& dst) {
        if (auto v = take(key)) {
            const long long parsed = parse_ll(key, *v);
            if (parsed < INT_MIN || parsed > INT_MAX) {
                throw ConfigError(key + ": value out of range");
            }
            dst = static_cast<int>(parsed);
        }
    }

    void take_double(const std::string& key, double& dst) {
        if (auto v = take(key)) dst = parse_double(key, *v);
    }

    void take_bool(const std::string& key, bool& dst) {
        if (auto v = take(key)) {
            if (*v == "true" || *v == "1") dst = true;
            else if (*v == "false" || *v == "0") dst = false;
            else throw ConfigError(key + ": expected true/false, got '" + *v + "'");
        }
    }

    void finish() const {
        if (!kv_.empty()) {
            std::string keys;
            for (const auto& [k, _] : kv_) keys += (keys.empty() ? "" : ", ") + k;
            throw ConfigError("unknown config key(s): " + keys);
        }
    }

    static std::uint64_t parse_u64(const std::string& key, const std::string& v) {
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw ConfigError(key + ": expected unsigned integer, got '" + v + "'");
        }
        return out;
    }

    static long long parse_ll(const std::string& key, const std::string& v) {
        long long out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw ConfigError(key + ": expected integer, got '" + v + "'");
        }
        return out;
    }

    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected real number, got '" + v + "'");
        }
    }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

RunConfig config_from_map(const std::map<std::string, std::string>& kv) {
    KvReader r(kv);
    RunConfig cfg;

    r.take_u64("seed", cfg.seed);
    r.take_string("out", cfg.out);

    r.take_string("data.path", cfg.data_path);
    r.take_string("data.test_path", cfg.data_test_path);
    r.take_int("data.n_per_class", cfg.n_per_class);
    r.take_int("data.n_test_per_class", cfg.n_test_per_class);
    r.take_int("data.n_classes", cfg.n_classes);
    r.take_int("data.height", cfg.height);
    r.take_int("data.width", cfg.width);
    r.take_int("data.channels", cfg.channels);

    r.take_double("part.alpha", cfg.part_alpha);
    r.take_int("model.hidden_dim", cfg.hidden_dim);

    r.take_int("fed.n_clients", cfg.n_clients);
    r.take_double("fed.malicious_fraction", cfg.malicious_fraction);
    r.take_int("fed.rounds", cfg.rounds);
    r.take_double("fed.sample_fraction", cfg.sample_fraction);
    r.take_int("fed.local_steps", cfg.local_steps);
    r.take_double("fed.lr", cfg.lr);
    r.take_int("fed.batch_size", cfg.batch_size);
    if (auto v = r.take("fed.personalization")) {
        if (*v == "none") cfg.personalization = Personalization::none;
        else if (*v == "fedbn") cfg.personalization = Personalization::fedbn;
        else throw ConfigError("fed.personalization: expected none|fedbn, got '" + *v + "'");
    }

    if (auto v = r.take("trigger.kind")) {
        if (*v == "dcinject") cfg.trigger_kind = TriggerKind::dcinject;
        else if (*v == "badnet") cfg.trigger_kind = TriggerKind::badnet;
        else throw ConfigError("trigger.kind: expected dcinject|badnet, got '" + *v + "'");
    }
    r.take_double("trigger.delta", cfg.delta);
    if (auto v = r.take("trigger.epsilon")) {
        if (*v == "auto") cfg.epsilon.reset();
        else cfg.epsilon = KvReader::parse_double("trigger.epsilon", *v);
    }
    r.take_double("trigger.rho", cfg.rho);
    r.take_bool("trigger.use_mfreq", cfg.use_mfreq);
    r.take_bool("trigger.use_whvs", cfg.use_whvs);
    r.take_bool("trigger.use_scale", cfg.use_scale);
    r.take_int("trigger.target_label", cfg.target_label);
    r.take_double("trigger.poison_ratio", cfg.poison_ratio);
    r.take_int("trigger.patch_side", cfg.patch_side);
    r.take_double("trigger.patch_value", cfg.patch_value);

    r.take_bool("ablate.components", cfg.ablate_components);
    r.take_bool("ablate.alpha_sweep", cfg.ablate_alpha_sweep);
    r.take_int("ablate.n_seeds", cfg.ablate_n_seeds);

    r.finish();
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };

    if (out.empty()) fail("out: must not be empty");
    if (data_path.empty() != data_test_path.empty()) {
        fail("data.path and data.test_path must be given together");
    }
    if (data_path.empty()) {
        if (n_per_class < 1) fail("data.n_per_class must be >= 1");
        if (n_test_per_class < 1) fail("data.n_test_per_class must be >= 1");
        if (n_classes < 2) fail("data.n_classes must be >= 2");
        if (height < 1 || width < 1) fail("data.height/width must be >= 1");
        if (channels != 1 && channels != 3) fail("data.channels must be 1 or 3");
    }
    if (!(part_alpha > 0.0)) fail("part.alpha must be positive");
    if (hidden_dim < 1) fail("model.hidden_dim must be >= 1");
    if (n_clients < 1) fail("fed.n_clients must be >= 1");
    if (!(malicious_fraction >= 0.0 && malicious_fraction < 1.0)) {
        fail("fed.malicious_fraction must be in [0,1)");
    }
    if (rounds < 0) fail("fed.rounds must be >= 0");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
        fail("fed.sample_fraction must be in (0,1]");
    }
    if (local_steps < 0) fail("fed.local_steps must be >= 0");
    if (!(lr > 0.0)) fail("fed.lr must be positive");
    if (batch_size < 1) fail("fed.batch_size must be >= 1");
    if (!(delta >= 0.0 && delta <= 1.0)) fail("trigger.delta must be in [0,1]");
    if (epsilon && (!(*epsilon >= 0.0) || !std::isfinite(*epsilon))) {
        fail("trigger.epsilon must be finite and nonnegative");
    }
    if (!(rho > 0.0 && rho <= 1.0)) fail("trigger.rho must be in (0,1]");
    if (target_label < 0) fail("trigger.target_label must be >= 0");
    if (data_path.empty() && target_label >= n_classes) {
        fail("trigger.target_label must be < data.n_classes");
    }
    if (!(poison_ratio >= 0.0 && poison_ratio <= 1.0)) {
        fail("trigger.poison_ratio must be in [0,1]");
    }
    if (patch_side < 1) fail("trigger.patch_side must be >= 1");
    if (!(patch_value >= 0.0 && patch_value <= 1.0)) fail("trigger.patch_value must be in [0,1]");
    if (ablate_n_seeds < 1) fail("ablate.n_seeds must be >= 1");
}

double RunConfig::resolved_epsilon(int h, int w) const {
    return epsilon ? *epsilon : default_epsilon(h, w);
}

TriggerConfig RunConfig::trigger_config(int h, int w) const {
    TriggerConfig t;
    t.kind = trigger_kind;
    t.delta = delta;
    t.epsilon = resolved_epsilon(h, w);
    t.band = FrequencyBand(rho);
    t.use_mfreq = use_mfreq;
    t.use_whvs = use_whvs;
    t.use_scale = use_scale;
    t.target_label = target_label;
    t.poison_ratio = poison_ratio;
    t.seed = derive_seed(seed, {0x74726967ULL});
    t.patch_side = patch_side;
    t.patch_value = patch_value;
    t.validate();
    return t;
}

FederationConfig RunConfig::federation_config(int h, int w) const {
    FederationConfig f;
    f.n_clients = n_clients;
    f.malicious_fraction = malicious_fraction;
    f.rounds = rounds;
    f.sample_fraction = sample_fraction;
    f.local_steps = local_steps;
    f.lr = lr;
    f.batch_size = batch_size;
    f.personalization = personalization;
    f.hidden_dim = hidden_dim;
    f.trigger = trigger_config(h, w);
    f.seed = derive_seed(seed, {0x666564ULL});
    f.validate();
    return f;
}

std::uint64_t RunConfig::partition_seed() const { return derive_seed(seed, {0x70617274ULL}); }
std::uint64_t RunConfig::synth_seed() const { return derive_seed(seed, {0x73796e7468ULL}); }

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::string RunConfig::echo(std::optional<std::pair<int, int>> image_size) const {
    std::ostringstream out_text;
    auto put = [&out_text](const std::string& key, const std::string& value) {
        out_text << key << " = " << value << "\n";
    };
    put("seed", std::to_string(seed));
    put("out", out);
    put("data.path", data_path);
    put("data.test_path", data_test_path);
    put("data.n_per_class", std::to_string(n_per_class));
    put("data.n_test_per_class", std::to_string(n_test_per_class));
    put("data.n_classes", std::to_string(n_classes));
    put("data.height", std::to_string(height));
    put("data.width", std::to_string(width));
    put("data.channels", std::to_string(channels));
    put("part.alpha", format_double(part_alpha));
    put("model.hidden_dim", std::to_string(hidden_dim));
    put("fed.n_clients", std::to_string(n_clients));
    put("fed.malicious_fraction", format_double(malicious_fraction));
    put("fed.rounds", std::to_string(rounds));
    put("fed.sample_fraction", format_double(sample_fraction));
    put("fed.local_steps", std::to_string(local_steps));
    put("fed.lr", format_double(lr));
    put("fed.batch_size", std::to_string(batch_size));
    put("fed.personalization", personalization == Personalization::fedbn ? "fedbn" : "none");
    put("trigger.kind", trigger_kind == TriggerKind::dcinject ? "dcinject" : "badnet");
    put("trigger.delta", format_double(delta));
    if (image_size) {
        put("trigger.epsilon", format_double(resolved_epsilon(image_size->first, image_size->second)));
    } else {
        put("trigger.epsilon", epsilon ? format_double(*epsilon) : "auto");
    }
    put("trigger.rho", format_double(rho));
    put("trigger.use_mfreq", use_mfreq ? "true" : "false");
    put("trigger.use_whvs", use_whvs ? "true" : "false");
    put("trigger.use_scale", use_scale ? "true" : "false");
    put("trigger.target_label", std::to_string(target_label));
    put("trigger.poison_ratio", format_double(poison_ratio));
    put("trigger.patch_side", std::to_string(patch_side));
    put("trigger.patch_value", format_double(patch_value));
    put("ablate.components", ablate_components ? "true" : "false");
    put("ablate.alpha_sweep", ablate_alpha_sweep ? "true" : "false");
    put("ablate.n_seeds", std::to_string(ablate_n_seeds));
    return out_text.str();
}

RunConfig load_run_config(const std::optional<std::string>& file_path,
                          const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed_flag,
                          const std::optional<std::string>& out_flag) {
    std::map<std::string, std::string> kv;
    if (file_path) {
        std::ifstream in(*file_path);
        if (!in) throw ConfigError("cannot open config file " + *file_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        kv = parse_kv_text(buffer.str());
    }
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects key=value, got '" + item + "'");
        }
        std::string key = item.substr(0, eq);
        std::string value = item.substr(eq + 1);
        // allow spaces around '=' in shell-quoted values
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
        kv[key] = value;
    }
    if (seed_flag) kv["seed"] = std::to_string(*seed_flag);
    if (out_flag) kv["out"] = *out_flag;
    return config_from_map(kv);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[hash & 0xf];
        hash >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace dcinject
