// reflex: command-line front end for the dialogue engine, the toy world
// experiments and the HTTP service.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "reflex/aae/aae.hpp"
#include "reflex/backends/config.hpp"
#include "reflex/core/error.hpp"
#include "reflex/core/json.hpp"
#include "reflex/core/rng.hpp"
#include "reflex/dpo/policy_store.hpp"
#include "reflex/dpo/trainer.hpp"
#include "reflex/service/render.hpp"
#include "reflex/service/server.hpp"
#include "reflex/service/session_manager.hpp"
#include "reflex/store/replay.hpp"
#include "reflex/toyworld/simulation.hpp"

namespace {

using namespace reflex;

struct Globals {
    std::uint64_t seed = 1;
    std::string format = "text";
    std::string config;
};

backends::BackendConfig backend_config(const Globals& g) {
    if (!g.config.empty()) return backends::load_config(g.config);
    backends::BackendConfig cfg;
    backends::apply_env_overrides(cfg);
    return cfg;
}

// --- chat -------------------------------------------------------------------

struct ChatOptions {
    std::string mode = "toy";
    std::string schema = "default";
    std::string persona;
    std::string data_dir = "reflex-data";
};

void print_round(const engine::RoundRecord& r, const AspectSchema& schema) {
    std::cout << "[round " << r.round << "]\n";
    std::cout << "prompt:   " << r.prompt.text << '\n';
    if (const auto* v = r.image.toy()) std::cout << "image:    " << phrase_stack(*v, schema) << '\n';
    else if (const auto* b = r.image.blob()) std::cout << "image:    " << b->hash << " (" << b->size << " bytes)\n";
    for (const auto& aspect : schema.aspects) {
        const auto it = r.captions.captions.find(aspect);
        if (it != r.captions.captions.end()) std::cout << "  " << aspect << ": " << it->second << '\n';
    }
    std::cout << "question: " << r.question.text << '\n';
}

int run_chat(const Globals& g, const ChatOptions& o) {
    service::ServiceConfig cfg;
    cfg.data_dir = o.data_dir;
    cfg.backend = backend_config(g);
    service::SessionManager manager(cfg);

    service::CreateRequest req;
    req.schema = o.schema;
    if (!o.persona.empty()) req.persona = o.persona;
    req.mode = o.mode == "remote" ? backends::Kind::Remote : backends::Kind::Toy;
    req.seed = g.seed;
    const auto state = manager.create(req);
    std::cout << "session " << state.id << " (" << state.schema.name << ", " << o.mode
              << "). Type a description, \"Aspect=value\" assignments, or :quit.\n";

    std::string line;
    while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line == ":quit") break;
        if (line.empty()) continue;
        try {
            const auto current = manager.state(state.id);
            const auto input = req.mode == backends::Kind::Toy ? engine::parse_user_input(line, current.schema)
                                                                : engine::UserInput{line, std::nullopt};
            const auto out = manager.message(state.id, input);
            if (g.format == "json") std::cout << service::render_round(out.record, current.schema).dump() << '\n';
            else print_round(out.record, current.schema);
        } catch (const Error& e) {
            // One bad message should not end the conversation.
            std::cerr << "error: " << e.what() << '\n';
        }
    }
    manager.close(state.id);
    return 0;
}

// --- simulate ---------------------------------------------------------------

struct SimulateOptions {
    int dialogues = 500;
    int rounds = 4;
    double reply_prob = 1.0;
    double neglect = 0.0;
    unsigned threads = 0;
    int initial_aspects = 1;
};

int run_simulate(const Globals& g, const SimulateOptions& o) {
    toy::SimulationConfig cfg;
    cfg.dialogues = o.dialogues;
    cfg.rounds = o.rounds;
    cfg.seed = g.seed;
    cfg.reply_prob = o.reply_prob;
    cfg.world.neglect_prob = o.neglect;
    cfg.threads = o.threads;
    if (o.initial_aspects < 0 || static_cast<std::size_t>(o.initial_aspects) > cfg.world.schema.size())
        throw Error(ErrorCode::InvalidArgument, "--initial-aspects out of range");
    cfg.initial_aspects.clear();
    for (int i = 0; i < o.initial_aspects; ++i) cfg.initial_aspects.push_back(static_cast<std::size_t>(i));

    const auto table = toy::run_simulation(cfg);
    if (g.format == "csv") std::cout << toy::to_csv(table);
    else if (g.format == "json") std::cout << Json(table).dump() << '\n';
    else std::cout << toy::to_text(table);
    return 0;
}

// --- train-dpo --------------------------------------------------------------

struct TrainOptions {
    std::string pairs;
    int synthetic = 120;
    dpo::TrainerConfig trainer;
    int win_samples = 2000;
    std::string out;
};

int run_train(const Globals& g, const TrainOptions& o) {
    dpo::validate_config(o.trainer);
    const auto ref = dpo::default_reference_policy();
    const auto pairs = o.pairs.empty()
                           ? dpo::synthesize_pairs(ref, dpo::prefer_positive_region, o.synthetic,
                                                   Rng::derive_seed(g.seed, "pairs"))
                           : dpo::PairStore(o.pairs).load();
    const auto result = dpo::train(ref, ref, pairs, o.trainer);
    const double win = dpo::win_rate(result.params, ref, dpo::prefer_positive_region, o.win_samples,
                                     Rng::derive_seed(g.seed, "win"));
    const double kl = dpo::policy_kl(result.params, ref);
    if (!o.out.empty()) dpo::save_policy(o.out, result.params);

    // Mean step loss per epoch.
    std::map<int, std::pair<double, int>> epochs;
    for (const auto& s : result.curve) {
        auto& [sum, n] = epochs[s.epoch];
        sum += s.loss;
        ++n;
    }

    if (g.format == "json") {
        Json curve = Json::array();
        for (const auto& s : result.curve) curve.push_back(s);
        std::cout << Json{{"pairs", pairs.size()},
                          {"config", o.trainer},
                          {"curve", std::move(curve)},
                          {"win_rate", win},
                          {"kl", kl}}
                         .dump()
                  << '\n';
    } else if (g.format == "csv") {
        std::cout << "epoch,step,batch,loss\n";
        char line[96];
        for (const auto& s : result.curve) {
            std::snprintf(line, sizeof line, "%d,%d,%zu,%.9f\n", s.epoch, s.step, s.batch, s.loss);
            std::cout << line;
        }
    } else {
        char line[96];
        std::cout << "pairs " << pairs.size() << ", beta " << o.trainer.beta << ", lr " << o.trainer.learning_rate
                  << '\n';
        std::cout << "epoch  mean loss\n";
        for (const auto& [epoch, acc] : epochs) {
            std::snprintf(line, sizeof line, "%5d  %.6f\n", epoch, acc.first / acc.second);
            std::cout << line;
        }
        std::snprintf(line, sizeof line, "win rate %.4f (n=%d)\nkl %.6f\n", win, o.win_samples, kl);
        std::cout << line;
    }
    return 0;
}

// --- aae-sweep --------------------------------------------------------------

struct SweepOptions {
    aae::SweepConfig sweep;
    double neglect = 0.2;
};

int run_sweep(const Globals& g, SweepOptions o) {
    o.sweep.seed = g.seed;
    toy::WorldConfig world;
    world.neglect_prob = o.neglect;
    const auto rows = aae::threshold_sweep(o.sweep, world);
    if (g.format == "csv") std::cout << aae::to_csv(rows);
    else if (g.format == "json") std::cout << Json(rows).dump() << '\n';
    else std::cout << aae::to_text(rows);
    return 0;
}

// --- serve ------------------------------------------------------------------

struct ServeOptions {
    std::string listen;
    std::string data_dir = "reflex-data";
};

int run_serve(const Globals& g, const ServeOptions& o) {
    std::string listen = o.listen;
    if (listen.empty()) {
        const char* env = std::getenv("REFLEX_LISTEN");
        listen = env && *env ? env : "127.0.0.1:8080";
    }
    const auto addr = service::parse_listen(listen);

    service::ServiceConfig cfg;
    cfg.data_dir = o.data_dir;
    cfg.backend = backend_config(g);
    service::SessionManager manager(cfg);
    service::HttpServer server(manager);

    // Route SIGINT/SIGTERM to a waiter thread instead of an async handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    const int port = server.bind(addr.host, addr.port);
    std::cout << "listening on " << addr.host << ':' << port << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.serve();
    // serve() can also return on its own; wake the waiter so it can exit.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

// --- replay -----------------------------------------------------------------

int run_replay(const Globals& g, const std::string& file) {
    const auto result = store::replay_file(file);
    const auto& s = result.state;
    if (g.format == "json") {
        std::cout << canonical(s) << '\n';
        return 0;
    }
    std::cout << "session " << s.id << '\n'
              << "schema  " << s.schema.name << '\n'
              << "mode    " << (s.mode == backends::Kind::Toy ? "toy" : "remote") << '\n'
              << "persona " << s.persona.value_or("-") << '\n'
              << "status  " << (s.status == engine::SessionStatus::Open ? "open" : "closed") << '\n'
              << "rounds  " << s.rounds.size() << '\n';
    for (const auto& r : s.rounds)
        std::cout << "  " << r.round << ": " << r.prompt.text << " -> " << r.question.aspect << '\n';
    std::cout << "preferences " << result.side.preferences << ", training updates " << result.side.training_updates
              << ", tool invocations " << result.side.tool2_invocations << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflex: interactive text-to-image dialogue with reflection, preference tuning and neglect repair"};
    app.name("reflex");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Master seed for every stochastic choice")->capture_default_str();
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    app.add_option("--config", g.config, "Backend config file (JSON)")->check(CLI::ExistingFile);

    ChatOptions chat;
    auto* c = app.add_subcommand("chat", "Interactive session on stdin");
    c->add_option("--mode", chat.mode, "Backend mode")->check(CLI::IsMember({"toy", "remote"}))->capture_default_str();
    c->add_option("--schema", chat.schema, "Aspect schema")->capture_default_str();
    c->add_option("--persona", chat.persona, "Persona (starting model)");
    c->add_option("--data-dir", chat.data_dir, "Session and image storage")->capture_default_str();

    SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "Toy-world dialogues against simulated users");
    s->add_option("--dialogues", sim.dialogues, "Number of dialogues")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--rounds", sim.rounds, "Rounds per dialogue")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--reply-prob", sim.reply_prob, "Probability the user answers")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    s->add_option("--neglect", sim.neglect, "Toy generator neglect probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    s->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();
    s->add_option("--initial-aspects", sim.initial_aspects, "Aspects revealed in the first message")
        ->capture_default_str();

    TrainOptions tr;
    auto* t = app.add_subcommand("train-dpo", "Preference tuning of the toy denoising policy");
    auto* pairs_opt = t->add_option("--pairs", tr.pairs, "Pair store (JSON lines)")->check(CLI::ExistingFile);
    t->add_option("--synthetic", tr.synthetic, "Synthetic pairs when no store is given")
        ->check(CLI::PositiveNumber)
        ->excludes(pairs_opt)
        ->capture_default_str();
    t->add_option("--beta", tr.trainer.beta, "KL strength")->capture_default_str();
    t->add_option("--epochs", tr.trainer.epochs, "Epochs")->capture_default_str();
    t->add_option("--lr", tr.trainer.learning_rate, "Learning rate")->capture_default_str();
    t->add_option("--batch-size", tr.trainer.batch_size, "Pairs per step")->capture_default_str();
    t->add_option("--prompts-per-epoch", tr.trainer.prompts_per_epoch, "Steps per epoch")->capture_default_str();
    t->add_option("--win-samples", tr.win_samples, "Samples for the win rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    t->add_option("--out", tr.out, "Write the trained policy here");

    SweepOptions sw;
    auto* a = app.add_subcommand("aae-sweep", "Neglect repair tool across check thresholds");
    a->add_option("--thresholds", sw.sweep.thresholds, "Thresholds k")->delimiter(',');
    a->add_option("--trials", sw.sweep.trials, "Prompts per threshold")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--specified", sw.sweep.specified, "Specified slots per prompt")->capture_default_str();
    a->add_option("--neglect", sw.neglect, "Toy generator neglect probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    a->add_option("--max-iter", sw.sweep.max_iterations, "Regenerations per prompt")->capture_default_str();

    ServeOptions sv;
    auto* v = app.add_subcommand("serve", "HTTP JSON API");
    v->add_option("--listen", sv.listen, "host:port (default $REFLEX_LISTEN or 127.0.0.1:8080)");
    v->add_option("--data-dir", sv.data_dir, "Session and image storage")->capture_default_str();

    std::string replay_file;
    auto* r = app.add_subcommand("replay", "Rebuild a session from its event log");
    r->add_option("file", replay_file, "Event log (JSON lines)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (c->parsed()) return run_chat(g, chat);
        if (s->parsed()) return run_simulate(g, sim);
        if (t->parsed()) return run_train(g, tr);
        if (a->parsed()) return run_sweep(g, sw);
        if (v->parsed()) return run_serve(g, sv);
        if (r->parsed()) return run_replay(g, replay_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
