#include "reflex/dpo/trainer.hpp"

#include <fstream>

namespace reflex::dpo {

void validate_config(const TrainerConfig& cfg) {
    if (!(cfg.beta > 0.0)) throw Error(ErrorCode::NonPositiveBeta, "beta must be > 0");
    if (cfg.learning_rate < 0.0) throw Error(ErrorCode::InvalidArgument, "learning_rate must be >= 0");
    if (cfg.epochs < 1 || cfg.prompts_per_epoch < 1 || cfg.batch_size < 1)
        throw Error(ErrorCode::InvalidArgument, "epochs, prompts_per_epoch and batch_size must be positive");
}

TrainResult train(const Policy& initial, const Policy& ref, std::span<const PreferencePair> pairs,
                  const TrainerConfig& cfg, const StepObserver& observer) {
    validate_config(cfg);
    if (pairs.empty()) throw Error(ErrorCode::EmptyStore, "no preference pairs to train on");
    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t num_batches = (pairs.size() + batch_size - 1) / batch_size;

    TrainResult result{initial, {}};
    result.curve.reserve(static_cast<std::size_t>(cfg.epochs * cfg.prompts_per_epoch));
    for (int n = 0; n < cfg.epochs; ++n) {
        for (int k = 0; k < cfg.prompts_per_epoch; ++k) {
            const auto b = static_cast<std::size_t>(n * cfg.prompts_per_epoch + k) % num_batches;
            const auto batch = pairs.subspan(b * batch_size, std::min(batch_size, pairs.size() - b * batch_size));
            TrainingStep step{n, k, b, d3po_batch_loss(result.params, ref, batch, cfg.beta)};
            result.params.bias -= cfg.learning_rate * d3po_grad(result.params, ref, batch, cfg.beta);
            result.curve.push_back(step);
            if (observer) observer(step, result.params);
        }
    }
    return result;
}

int prefer_positive_region(const DenoisingTrajectory& a, const DenoisingTrajectory& b) {
    const double ma = a.final_latent().mean();
    const double mb = b.final_latent().mean();
    return ma > mb ? 1 : (ma < mb ? -1 : 0);
}

double win_rate(const Policy& theta, const Policy& ref, const PreferenceOracle& oracle, int n, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "win_rate needs n >= 1");
    int wins = 0;
    for (int i = 0; i < n; ++i) {
        // Same noise stream for both policies: differences come from the parameters alone.
        auto rng_theta = Rng::derive(seed, "win_rate.sample", {static_cast<std::uint64_t>(i)});
        auto rng_ref = rng_theta;
        const auto mine = sample_trajectory(theta, rng_theta);
        const auto theirs = sample_trajectory(ref, rng_ref);
        const int verdict = oracle(mine, theirs);
        if (verdict > 0 || (verdict == 0 && Rng::derive(seed, "win_rate.coin", {static_cast<std::uint64_t>(i)}).bernoulli(0.5)))
            ++wins;
    }
    return static_cast<double>(wins) / n;
}

std::vector<PreferencePair> synthesize_pairs(const Policy& policy, const PreferenceOracle& oracle, int n,
                                             std::uint64_t seed) {
    std::vector<PreferencePair> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    auto rng = Rng::derive(seed, "synthesize_pairs");
    while (static_cast<int>(out.size()) < n) {
        auto a = sample_trajectory(policy, rng);
        auto b = sample_trajectory(policy, rng);
        const int verdict = oracle(a, b);
        if (verdict == 0) continue;
        const auto id = "synthetic-" + std::to_string(out.size());
        const auto ts = static_cast<std::int64_t>(out.size());
        if (verdict > 0) out.push_back({std::move(a), std::move(b), id, ts});
        else out.push_back({std::move(b), std::move(a), id, ts});
    }
    return out;
}

namespace {

std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

Vector<double> from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vector<double>>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

void to_json(Json& j, const Schedule& s) { j = Json{{"sigma", to_std(s.sigma)}, {"drift", to_std(s.drift)}}; }

void from_json(const Json& j, Schedule& s) {
    s.sigma = from_std(j.at("sigma").get<std::vector<double>>());
    s.drift = from_std(j.at("drift").get<std::vector<double>>());
    if (s.sigma.size() != s.drift.size() || s.sigma.size() < 1)
        throw Error(ErrorCode::ShapeMismatch, "schedule sigma/drift lengths differ or are empty");
    if (!(s.sigma.array() > 0.0).all()) throw Error(ErrorCode::InvalidArgument, "schedule sigma must be > 0");
}

void to_json(Json& j, const Policy& p) {
    Json rows = Json::array();
    for (Eigen::Index k = 0; k < p.steps(); ++k) rows.push_back(std::vector<double>(p.bias.row(k).begin(), p.bias.row(k).end()));
    j = Json{{"steps", p.steps()}, {"dim", p.dim()}, {"bias", std::move(rows)}, {"schedule", p.schedule}};
}

void from_json(const Json& j, Policy& p) {
    j.at("schedule").get_to(p.schedule);
    const auto steps = j.at("steps").get<Eigen::Index>();
    const auto dim = j.at("dim").get<Eigen::Index>();
    const auto& rows = j.at("bias");
    if (steps != p.schedule.steps() || static_cast<Eigen::Index>(rows.size()) != steps || dim < 1)
        throw Error(ErrorCode::ShapeMismatch, "policy bias shape disagrees with schedule");
    p.bias.resize(steps, dim);
    for (Eigen::Index k = 0; k < steps; ++k) {
        const auto row = rows.at(static_cast<std::size_t>(k)).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != dim) throw Error(ErrorCode::ShapeMismatch, "bias row width");
        for (Eigen::Index i = 0; i < dim; ++i) p.bias(k, i) = row[static_cast<std::size_t>(i)];
    }
}

void to_json(Json& j, const PreferencePair& p) {
    j = Json{{"winner", p.winner}, {"loser", p.loser}, {"prompt_id", p.prompt_id}, {"timestamp", p.timestamp}};
}

void from_json(const Json& j, PreferencePair& p) {
    j.at("winner").get_to(p.winner);
    j.at("loser").get_to(p.loser);
    j.at("prompt_id").get_to(p.prompt_id);
    j.at("timestamp").get_to(p.timestamp);
    if (p.winner.steps() != p.loser.steps() || p.winner.dim() != p.loser.dim())
        throw Error(ErrorCode::ShapeMismatch, "winner and loser trajectories differ in shape");
}

void to_json(Json& j, const TrainerConfig& c) {
    j = Json{{"beta", c.beta},
             {"learning_rate", c.learning_rate},
             {"epochs", c.epochs},
             {"prompts_per_epoch", c.prompts_per_epoch},
             {"batch_size", c.batch_size}};
}

void from_json(const Json& j, TrainerConfig& c) {
    c.beta = j.value("beta", c.beta);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.prompts_per_epoch = j.value("prompts_per_epoch", c.prompts_per_epoch);
    c.batch_size = j.value("batch_size", c.batch_size);
}

void to_json(Json& j, const TrainingStep& s) {
    j = Json{{"epoch", s.epoch}, {"step", s.step}, {"batch", s.batch}, {"loss", s.loss}};
}

PairStore::PairStore(std::filesystem::path path) : path_(std::move(path)) {}

std::size_t PairStore::append(const PreferencePair& pair) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open pair store " + path_.string());
    out << Json(pair).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + path_.string());
    return count();
}

std::vector<PreferencePair> PairStore::load() const {
    std::vector<PreferencePair> pairs;
    std::ifstream in(path_, std::ios::binary);
    if (!in) return pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            pairs.push_back(Json::parse(line).get<PreferencePair>());
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::CorruptLog, path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return pairs;
}

std::size_t PairStore::count() const {
    std::ifstream in(path_, std::ios::binary);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

void save_policy(const std::filesystem::path& path, const Policy& params) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
        out << Json(params).dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

Policy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return Json::parse(in).get<Policy>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
}

} // namespace reflex::dpo
