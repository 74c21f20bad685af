// masmon — malicious-agent monitoring for multi-agent transcripts.
//
// simulate: run a seeded campaign from a config file, write JSON/CSV reports
// analyze:  score one transcript and emit a detection report
// report:   merge campaign CSVs into per-(topology, method) tables

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "masmon/campaign.hpp"
#include "masmon/contribution.hpp"
#include "masmon/graph.hpp"
#include "masmon/judge.hpp"
#include "masmon/repair.hpp"
#include "masmon/report_io.hpp"
#include "masmon/transcript.hpp"
#include "masmon/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace masmon;

// Exit codes, one per error class; stderr carries diagnostics only.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitJudge = 4;
constexpr int kExitData = 5;
constexpr int kExitInternal = 70;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::kConfigInvalid:
        case Errc::kInvalidSchedule: return kExitConfig;
        case Errc::kInputUnreadable:
        case Errc::kStateInvalid: return kExitInput;
        case Errc::kJudgeUnavailable: return kExitJudge;
        case Errc::kInternal: return kExitInternal;
        default: return kExitData;
    }
}

struct JudgeFlags {
    std::string kind = "synthetic";
    double noise = 0.0;
    std::string endpoint;
    std::string model;
    std::string api_key_env = "MASMON_API_KEY";
    int concurrency = 4;
};

void add_judge_flags(CLI::App* cmd, JudgeFlags& f) {
    cmd->add_option("--judge", f.kind, "Judge kind: synthetic|llm")
        ->check(CLI::IsMember({"synthetic", "llm"}));
    cmd->add_option("--judge-noise", f.noise, "Synthetic judge noise rate in [0,1]");
    cmd->add_option("--judge-endpoint", f.endpoint, "Chat-completion endpoint URL (llm judge)");
    cmd->add_option("--judge-model", f.model, "Model name (llm judge)");
    cmd->add_option("--judge-api-key-env", f.api_key_env,
                    "Environment variable holding the API key");
    cmd->add_option("--judge-concurrency", f.concurrency, "Max in-flight judge requests");
}

JudgeConfig judge_from_flags(const JudgeFlags& f, std::uint64_t seed) {
    JudgeConfig cfg;
    cfg.kind = f.kind == "llm" ? JudgeKind::kLlm : JudgeKind::kSynthetic;
    cfg.noise_rate = f.noise;
    cfg.rng_seed = seed;
    cfg.endpoint_url = f.endpoint;
    cfg.model_name = f.model;
    cfg.api_key_env_var = f.api_key_env;
    cfg.concurrency = f.concurrency;
    return cfg;
}

// Flags override the config file selectively: only what was actually given.
void apply_judge_overrides(const CLI::App* cmd, const JudgeFlags& f, JudgeConfig& cfg) {
    if (cmd->count("--judge")) cfg.kind = f.kind == "llm" ? JudgeKind::kLlm : JudgeKind::kSynthetic;
    if (cmd->count("--judge-noise")) cfg.noise_rate = f.noise;
    if (cmd->count("--judge-endpoint")) cfg.endpoint_url = f.endpoint;
    if (cmd->count("--judge-model")) cfg.model_name = f.model;
    if (cmd->count("--judge-api-key-env")) cfg.api_key_env_var = f.api_key_env;
    if (cmd->count("--judge-concurrency")) cfg.concurrency = f.concurrency;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::kInputUnreadable, "cannot write " + path.string());
    out << content;
}

int cmd_simulate(const CLI::App* cmd, const std::string& config_path,
                 const std::string& output_dir, const JudgeFlags& judge_flags, double epsilon,
                 std::uint64_t seed, const std::string& method, bool dump_transcripts,
                 int quarantine_base, int quarantine_backoff, bool count_quarantined) {
    CampaignSpec spec = CampaignSpec::load_file(config_path);
    if (cmd->count("--seed")) spec.master_seed = seed;
    if (cmd->count("--epsilon")) spec.detection.epsilon = epsilon;
    if (cmd->count("--method")) spec.method = detection_method_from_name(method);
    if (cmd->count("--quarantine-base")) spec.repair.base_quarantine = quarantine_base;
    if (cmd->count("--quarantine-backoff")) spec.repair.backoff_factor = quarantine_backoff;
    if (cmd->count("--count-quarantined-votes")) spec.count_quarantined_votes = count_quarantined;
    apply_judge_overrides(cmd, judge_flags, spec.judge);
    if (dump_transcripts) spec.dump_transcripts = true;
    spec.validate();

    CampaignReport report = run_campaign(spec);

    fs::path dir(output_dir);
    fs::create_directories(dir);
    write_file(dir / "campaign.json", report.to_json());
    write_file(dir / "campaign.csv", report.to_csv());
    if (spec.dump_transcripts) {
        fs::create_directories(dir / "transcripts");
        for (std::size_t e = 0; e < report.transcripts.size(); ++e) {
            std::ostringstream name;
            name << "episode_" << std::setw(5) << std::setfill('0') << e << ".jsonl";
            write_transcript_jsonl_file(report.transcripts[e],
                                        (dir / "transcripts" / name.str()).string());
        }
    }

    std::cout << report.to_json() << "\n";
    return kExitOk;
}

int cmd_analyze(const std::string& transcript_path, const JudgeFlags& judge_flags,
                double epsilon, std::uint64_t seed, const std::string& method,
                const std::string& output_path, const std::string& state_file,
                int quarantine_base, int quarantine_backoff) {
    Transcript transcript;
    MasGraph graph;
    try {
        transcript = read_transcript_jsonl_file(transcript_path);
        graph = build_graph(transcript);
    } catch (const Error& e) {
        throw Error(e.code(), transcript_path + ": " + e.detail());
    }

    JudgeConfig judge = judge_from_flags(judge_flags, seed);
    SignedGraph signed_graph = score_all_edges(graph, judge);

    DetectionConfig detection{epsilon};
    DetectionReport report;
    if (detection_method_from_name(method) == DetectionMethod::kBackprop) {
        NodeScores init = init_final_scores(graph, transcript);
        NodeScores scores = backpropagate(signed_graph, init);
        report = detect(total_scores(scores, graph), detection);
    } else {
        report = detect_no_bp(signed_graph);
        report.epsilon = epsilon;
    }

    std::set<AgentId> suppressed(report.flagged.begin(), report.flagged.end());
    if (!state_file.empty()) {
        QuarantineState state;
        if (fs::exists(state_file)) state = QuarantineState::load_file(state_file);
        RepairPolicy policy{quarantine_base, quarantine_backoff};
        state = defense_step(state, report, policy);
        state.save_file(state_file);
        suppressed.clear();
        for (const auto& [agent, remaining] : state.quarantined) {
            (void)remaining;
            suppressed.insert(agent);
        }
    }

    nlohmann::json cfg;
    cfg["transcript"] = transcript_path;
    cfg["judge"] = judge_flags.kind;
    cfg["judge_noise"] = judge_flags.noise;
    cfg["seed"] = seed;
    cfg["epsilon"] = epsilon;
    cfg["method"] = method;
    std::string out = analyze_report_json(report, suppressed, cfg.dump());

    if (output_path.empty())
        std::cout << out << "\n";
    else
        write_file(output_path, out + "\n");
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::string& output_path) {
    AggregateTable table = aggregate_campaign_csvs(inputs);
    std::string out = format == "csv" ? table.to_csv() : table.to_text();
    if (output_path.empty())
        std::cout << out;
    else
        write_file(output_path, out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"malicious-agent monitoring for LLM multi-agent transcripts"};
    app.set_version_flag("--version", std::string("masmon ") + masmon::kVersion);
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a seeded campaign from a config file");
    std::string sim_config, sim_output = "out";
    std::string sim_method = "backprop";
    double sim_epsilon = 1.5;
    std::uint64_t sim_seed = 42;
    bool sim_dump = false;
    JudgeFlags sim_judge;
    sim->add_option("--config", sim_config, "Campaign config JSON")->required();
    sim->add_option("--output-dir", sim_output, "Directory for campaign.json / campaign.csv");
    sim->add_option("--seed", sim_seed, "Master seed override");
    sim->add_option("--epsilon", sim_epsilon, "Detection threshold override");
    sim->add_option("--method", sim_method, "backprop|no_bp")
        ->check(CLI::IsMember({"backprop", "no_bp"}));
    sim->add_flag("--dump-transcripts", sim_dump, "Also write per-episode transcript JSONL");
    int sim_qbase = 3, sim_qbackoff = 2;
    bool sim_count_quarantined = false;
    sim->add_option("--quarantine-base", sim_qbase, "Base quarantine length (episodes)");
    sim->add_option("--quarantine-backoff", sim_qbackoff, "Quarantine escalation factor");
    sim->add_flag("--count-quarantined-votes", sim_count_quarantined,
                  "Count quarantined agents' final answers in the majority vote");
    add_judge_flags(sim, sim_judge);

    // analyze
    auto* ana = app.add_subcommand("analyze", "Detect malicious agents in one transcript");
    std::string ana_transcript, ana_output, ana_state;
    std::string ana_method = "backprop";
    double ana_epsilon = 1.5;
    std::uint64_t ana_seed = 42;
    int ana_qbase = 3, ana_qbackoff = 2;
    JudgeFlags ana_judge;
    ana->add_option("--transcript", ana_transcript, "Transcript JSONL path")->required();
    ana->add_option("--output", ana_output, "Report path (stdout when omitted)");
    ana->add_option("--seed", ana_seed, "Synthetic judge seed");
    ana->add_option("--epsilon", ana_epsilon, "Detection threshold");
    ana->add_option("--method", ana_method, "backprop|no_bp")
        ->check(CLI::IsMember({"backprop", "no_bp"}));
    ana->add_option("--state-file", ana_state,
                    "Quarantine state JSON, updated across invocations");
    ana->add_option("--quarantine-base", ana_qbase, "Base quarantine length (episodes)");
    ana->add_option("--quarantine-backoff", ana_qbackoff, "Quarantine escalation factor");
    add_judge_flags(ana, ana_judge);

    // report
    auto* rep = app.add_subcommand("report", "Aggregate campaign CSVs into tables");
    std::vector<std::string> rep_inputs;
    std::string rep_format = "text", rep_output;
    rep->add_option("inputs", rep_inputs, "campaign.csv files");
    rep->add_option("--format", rep_format, "text|csv")
        ->check(CLI::IsMember({"text", "csv"}));
    rep->add_option("--output", rep_output, "Output path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim, sim_config, sim_output, sim_judge, sim_epsilon, sim_seed,
                                sim_method, sim_dump, sim_qbase, sim_qbackoff,
                                sim_count_quarantined);
        if (ana->parsed())
            return cmd_analyze(ana_transcript, ana_judge, ana_epsilon, ana_seed, ana_method,
                               ana_output, ana_state, ana_qbase, ana_qbackoff);
        if (rep->parsed()) return cmd_report(rep_inputs, rep_format, rep_output);
    } catch (const Error& e) {
        std::cerr << "masmon: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "masmon: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
