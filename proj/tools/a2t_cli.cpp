// a2t: command-line driver for every pipeline stage.
//
// Each run writes a manifest (argv, resolved config, input and output
// hashes). By default it sits next to the first output as
// <output>.manifest.json; --manifest overrides. Stdout is hashed as the
// pseudo-output "-", so `a2t rerun --manifest m.json` can check that a
// rerun reproduces everything byte for byte.

#include <a2t/a2tmetric.hpp>
#include <a2t/analysis.hpp>
#include <a2t/annotation.hpp>
#include <a2t/corpus.hpp>
#include <a2t/humor.hpp>
#include <a2t/manifest.hpp>
#include <a2t/pseudo.hpp>
#include <a2t/relative_ranking.hpp>
#include <a2t/scoring.hpp>
#include <a2t/service.hpp>
#include <a2t/stats.hpp>
#include <a2t/store.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <limits>
#include <thread>

namespace fs = std::filesystem;
using namespace a2t;

namespace {

struct Run {
    RunManifest m;
    std::string out;  // stdout, emitted after the manifest is written
    bool hash_stdout = true;
    std::string manifest_flag;

    void print(const std::string& s) { out += s; }
    fs::path input(const fs::path& p) {
        m.add_input(p);
        return p;
    }
    void write(const fs::path& p, std::string_view content) {
        write_file(p, content);
        m.add_output(p);
    }
};

void finish(Run& r, const fs::path& default_manifest) {
    if (r.hash_stdout) r.m.outputs.push_back({"-", sha256_hex(r.out)});
    write_manifest(r.manifest_flag.empty() ? default_manifest : fs::path(r.manifest_flag), r.m);
}

fs::path beside(const fs::path& p) { return p.string() + ".manifest.json"; }

corpus::CorpusFormat format_for(const std::string& flag, const fs::path& p) {
    if (flag == "jsonl") return corpus::CorpusFormat::JSONL;
    if (flag == "csv") return corpus::CorpusFormat::CSV;
    if (!flag.empty()) fail_usage("bad_format", "--format must be jsonl or csv");
    return p.extension() == ".csv" ? corpus::CorpusFormat::CSV : corpus::CorpusFormat::JSONL;
}

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
        fail_data("bad_json", p.string() + ": " + e.what());
    }
}

std::string opt_fixed(const std::optional<double>& v, int d) { return v ? fixed(*v, d) : "n/a"; }

// Stats helpers shared by eval-metric and stats.
json system_level_json(const stats::SystemLevelReport& r) {
    json systems = json::array();
    for (const auto& s : r.systems)
        systems.push_back({{"system", s.system}, {"human_mean", s.human_mean}, {"metric_mean", s.metric_mean}, {"n", s.n}});
    return {{"systems", systems},
            {"pearson", r.pearson ? json(*r.pearson) : json(nullptr)},
            {"spearman", r.spearman ? json(*r.spearman) : json(nullptr)}};
}

std::vector<stats::SegmentScorePair> parse_pairs_csv(std::string_view text) {
    const auto t = parse_csv(text);
    std::vector<stats::SegmentScorePair> out;
    if (t.header.empty()) return out;
    const auto ca = t.column("abstract_id"), cc = t.column("candidate_id"), cs = t.column("system"),
               cm = t.column("metric_score"), ch = t.column("human_score");
    for (const auto& r : t.rows)
        out.push_back({r[ca], r[cc], r[cs], parse_double(r[cm], "metric_score"), parse_double(r[ch], "human_score")});
    return out;
}

const json kTauVariant = "wmt: concordant minus discordant over all pairs; metric ties count as discordant";

// --- rerun ----------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::string* captured);

int rerun(const fs::path& manifest_path, std::string& out) {
    const auto recorded = read_manifest(manifest_path);
    for (const auto& in : recorded.inputs) {
        if (!fs::exists(in.path)) fail_data("input_missing", "input " + in.path + " no longer exists");
        if (sha256_file(in.path) != in.sha256) fail_data("input_changed", "input " + in.path + " differs from the manifest");
    }
    std::string again;
    const int code = run(recorded.argv, &again);
    if (code != 0) return code;
    std::size_t bad = 0;
    for (const auto& o : recorded.outputs) {
        const auto now = o.path == "-" ? sha256_hex(again) : (fs::exists(o.path) ? sha256_file(o.path) : std::string("missing"));
        if (now != o.sha256) {
            ++bad;
            out += "differs: " + o.path + "\n";
        }
    }
    if (bad) {
        out += std::to_string(bad) + " of " + std::to_string(recorded.outputs.size()) + " outputs differ\n";
        return static_cast<int>(ErrorKind::Data);
    }
    out += "reproduced " + std::to_string(recorded.outputs.size()) + " outputs of '" + recorded.command + "'\n";
    return 0;
}

// --- serve ----------------------------------------------------------------------

int serve(service::ServiceConfig cfg, Run& r) {
    // SIGINT/SIGTERM go to a waiter thread that stops the server cleanly.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    fs::create_directories(cfg.data_dir);
    r.m.config = service::config_to_json(cfg);
    r.hash_stdout = false;
    finish(r, cfg.data_dir / "serve.manifest.json");

    service::Service svc(cfg);
    const int port = svc.bind();
    std::cout << "listening on " << cfg.host << ":" << port << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        svc.stop();
    });
    svc.serve();
    // serve() returns after stop(); wake the waiter if it is still blocked.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

int run(const std::vector<std::string>& args, std::string* captured) {
    CLI::App app{"a2t: title generation evaluation toolkit", "a2t"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    Run r;
    auto manifest_opt = [&](CLI::App* s) {
        s->add_option("--manifest", r.manifest_flag, "Where to write the run manifest");
    };

    // ingest
    std::string in_path, out_path, format;
    auto* ingest = app.add_subcommand("ingest", "Validate a JSONL or CSV corpus and write normalized JSONL");
    ingest->add_option("--input", in_path)->required();
    ingest->add_option("--out", out_path)->required();
    ingest->add_option("--format", format, "jsonl or csv (default: by extension)");
    manifest_opt(ingest);

    // filter
    corpus::FilterConfig fcfg;
    std::vector<std::string> venues;
    auto* filter = app.add_subcommand("filter", "Apply abstract-length, year and venue filters");
    filter->add_option("--input", in_path)->required();
    filter->add_option("--out", out_path)->required();
    filter->add_option("--max-abstract-words", fcfg.max_abstract_words, "Abstracts must have fewer words")->capture_default_str();
    filter->add_option("--min-year", fcfg.min_year)->capture_default_str();
    filter->add_flag("--main-conference-only", fcfg.main_conference_only);
    filter->add_option("--venue", venues, "Allowed venue (repeatable)");
    manifest_opt(filter);

    // split
    std::string spec_path, out_dir;
    std::optional<std::uint64_t> seed_flag;
    auto* split = app.add_subcommand("split", "Constrained train/dev/test split");
    split->add_option("--input", in_path)->required();
    split->add_option("--spec", spec_path, "Split spec JSON");
    split->add_option("--seed", seed_flag, "Overrides the seed in the --spec file");
    split->add_option("--out-dir", out_dir)->required();
    manifest_opt(split);

    // campaign
    std::string data_dir = "a2t-data", campaign_id, kind = "best_worst", instances_path, view = "analysis";
    std::vector<std::string> annotators, criteria{"overall"};
    std::size_t per_instance = 2, min_ann = 2, max_ann = 5;
    std::uint64_t seed = 0;
    bool rotate_keys = false;
    auto* campaign = app.add_subcommand("campaign", "Create, assign and export annotation campaigns");
    campaign->require_subcommand(1);
    auto* c_create = campaign->add_subcommand("create", "Create a campaign from an instances file");
    c_create->add_option("--data-dir", data_dir)->capture_default_str();
    c_create->add_option("--id", campaign_id)->required();
    c_create->add_option("--kind", kind, "best_worst, ranking or pairwise")->capture_default_str();
    c_create->add_option("--instances", instances_path, "JSON array of instances")->required();
    c_create->add_option("--annotator", annotators, "Annotator id (repeatable or comma separated)")->delimiter(',');
    c_create->add_option("--per-instance", per_instance)->capture_default_str();
    c_create->add_option("--min-annotators", min_ann)->capture_default_str();
    c_create->add_option("--max-annotators", max_ann)->capture_default_str();
    c_create->add_option("--criterion", criteria, "Ranking criterion (repeatable)")->delimiter(',');
    c_create->add_option("--seed", seed)->capture_default_str();
    manifest_opt(c_create);
    auto* c_assign = campaign->add_subcommand("assign", "Reassign annotators and issue access keys");
    c_assign->add_option("--data-dir", data_dir)->capture_default_str();
    c_assign->add_option("--id", campaign_id)->required();
    c_assign->add_option("--annotator", annotators, "New annotator pool (repeatable or comma separated)")->delimiter(',');
    c_assign->add_option("--per-instance", per_instance)->capture_default_str();
    c_assign->add_option("--seed", seed_flag, "Presentation-order seed (default: keep)");
    c_assign->add_flag("--rotate-keys", rotate_keys, "Issue fresh keys for every assigned annotator");
    manifest_opt(c_assign);
    auto* c_export = campaign->add_subcommand("export", "Export judgments as CSV");
    c_export->add_option("--data-dir", data_dir)->capture_default_str();
    c_export->add_option("--id", campaign_id)->required();
    c_export->add_option("--view", view, "annotator or analysis")->capture_default_str();
    c_export->add_option("--out", out_path)->required();
    manifest_opt(c_export);

    // score-bws
    std::string campaign_file, export_file, table_out;
    auto* score = app.add_subcommand("score-bws", "Best-worst scores per candidate");
    score->add_option("--data-dir", data_dir, "Campaign store (with --id)");
    score->add_option("--id", campaign_id);
    score->add_option("--campaign", campaign_file, "campaign.json (with --export)");
    score->add_option("--export", export_file, "Analysis-view export CSV");
    score->add_option("--out", out_path)->required();
    score->add_option("--table-out", table_out, "Also write the per-system table here");
    manifest_opt(score);

    // rr-convert
    std::string scores_path;
    auto* rrc = app.add_subcommand("rr-convert", "Turn BWS scores into relative-ranking judgments");
    rrc->add_option("--scores", scores_path)->required();
    rrc->add_option("--out", out_path)->required();
    manifest_opt(rrc);

    // train-metric / eval-metric
    std::string rr_path, emb_path, config_path, metric_path, part = "test";
    std::size_t n_splits = 5, split_index = 0;
    std::optional<std::size_t> epochs;
    metric::SplitSizes sizes;
    auto split_opts = [&](CLI::App* s) {
        s->add_option("--n-splits", n_splits)->capture_default_str();
        s->add_option("--split", split_index, "Which split to use")->capture_default_str();
        s->add_option("--seed", seed, "Split and training seed")->capture_default_str();
        s->add_option("--train-size", sizes.train)->capture_default_str();
        s->add_option("--dev-size", sizes.dev)->capture_default_str();
        s->add_option("--test-size", sizes.test)->capture_default_str();
    };
    auto* train = app.add_subcommand("train-metric", "Train the learned title metric on one split");
    train->add_option("--rr", rr_path, "Relative-ranking JSONL")->required();
    train->add_option("--embeddings", emb_path, "Embedding store JSONL")->required();
    train->add_option("--config", config_path, "Training config JSON");
    train->add_option("--epochs", epochs);
    train->add_option("--out", out_path)->required();
    split_opts(train);
    manifest_opt(train);
    auto* eval = app.add_subcommand("eval-metric", "Evaluate a trained metric against human judgments");
    eval->add_option("--metric", metric_path)->required();
    eval->add_option("--rr", rr_path)->required();
    eval->add_option("--embeddings", emb_path)->required();
    eval->add_option("--scores", scores_path, "BWS scores CSV for system-level correlation");
    eval->add_option("--part", part, "train, dev, test or all")->capture_default_str();
    eval->add_option("--out", out_path)->required();
    split_opts(eval);
    manifest_opt(eval);

    // ensemble
    std::string labels_path, gold_path, method = "sum";
    int th_i = 0, th_j = 1;
    bool binary = false;
    int stage = 1;
    auto* ens = app.add_subcommand("ensemble", "Humor classifier ensembles");
    ens->require_subcommand(1);
    auto* e_agg = ens->add_subcommand("aggregate", "Combine a label matrix into one label per title");
    e_agg->add_option("--labels", labels_path)->required();
    e_agg->add_option("--method", method, "mv or sum")->capture_default_str();
    e_agg->add_option("--i", th_i, "Lower EnsSUM threshold");
    e_agg->add_option("--j", th_j, "Upper EnsSUM threshold");
    e_agg->add_option("--out", out_path)->required();
    manifest_opt(e_agg);
    auto* e_search = ens->add_subcommand("search", "Exhaustive EnsSUM threshold search");
    e_search->add_option("--labels", labels_path)->required();
    e_search->add_option("--gold", gold_path)->required();
    e_search->add_flag("--binary", binary, "Score with the binary macro F1");
    e_search->add_option("--out", out_path, "Write the result as JSON");
    manifest_opt(e_search);
    auto* e_base = ens->add_subcommand("baseline", "Train one baseline classifier per balanced split");
    e_base->add_option("--embeddings", emb_path)->required();
    e_base->add_option("--pool", gold_path, "title_id,label CSV")->required();
    e_base->add_option("--stage", stage, "1 (100/200 per split) or 2 (400/800)")->capture_default_str();
    e_base->add_option("--seed", seed)->capture_default_str();
    e_base->add_option("--out", out_path, "Label matrix CSV")->required();
    manifest_opt(e_base);

    // humor-metrics
    std::string gens_path, system = "system";
    auto* hm = app.add_subcommand("humor-metrics", "Humor-control metrics for constrained generations");
    hm->add_option("--generations", gens_path, "abstract_id,constraint,title,assigned_label CSV")->required();
    hm->add_option("--system", system)->capture_default_str();
    hm->add_option("--out", out_path);
    manifest_opt(hm);

    // pseudo
    std::vector<std::size_t> n_values{2, 3};
    std::string threshold = "10", scope = "funny", removed_path, corpus_path, pseudo_path;
    auto* pseudo = app.add_subcommand("pseudo", "Pseudo-title filtering and merging");
    pseudo->require_subcommand(1);
    auto* p_filter = pseudo->add_subcommand("filter", "Label-consistency and n-gram frequency filter");
    p_filter->add_option("--generated", gens_path, "Generated titles JSONL")->required();
    p_filter->add_option("--labels", labels_path, "abstract_id,constraint,assigned_label CSV");
    p_filter->add_option("--n", n_values, "n-gram orders")->delimiter(',')->capture_default_str();
    p_filter->add_option("--threshold", threshold, "Maximum n-gram count, or inf")->capture_default_str();
    p_filter->add_option("--scope", scope, "funny or all")->capture_default_str();
    p_filter->add_option("--out", out_path)->required();
    p_filter->add_option("--removed", removed_path, "CSV report of removed titles");
    manifest_opt(p_filter);
    auto* p_merge = pseudo->add_subcommand("merge", "Pair originals with opposite-label pseudo titles");
    p_merge->add_option("--corpus", corpus_path, "Labeled original corpus")->required();
    p_merge->add_option("--pseudo", pseudo_path, "Filtered pseudo titles JSONL")->required();
    p_merge->add_option("--out", out_path)->required();
    manifest_opt(p_merge);

    // stats
    std::string pairs_path;
    std::vector<double> values;
    auto* st = app.add_subcommand("stats", "Correlations and multi-split summaries");
    st->add_option("--pairs", pairs_path, "abstract_id,candidate_id,system,metric_score,human_score CSV");
    st->add_option("--rr", rr_path, "Relative-ranking JSONL for segment-level tau (with --pairs)");
    st->add_option("--values", values, "Per-split values for mean±std")->delimiter(',');
    st->add_option("--out", out_path, "JSON report");
    manifest_opt(st);

    // analyze
    std::string samples_path, md_path;
    auto* an = app.add_subcommand("analyze", "Lexical overlap, length and edit overlap per system");
    an->add_option("--samples", samples_path, "system,abstract_id,title,abstract CSV")->required();
    an->add_option("--out", out_path, "CSV report")->required();
    an->add_option("--markdown", md_path);
    manifest_opt(an);

    // serve
    std::optional<int> port;
    std::optional<std::string> data_dir_flag;
    auto* sv = app.add_subcommand("serve", "Serve annotation campaigns over HTTP");
    sv->add_option("--config", config_path, "Service config JSON");
    sv->add_option("--port", port, "Overrides config and A2T_PORT; 0 picks a free port");
    sv->add_option("--data-dir", data_dir_flag, "Overrides config and A2T_DATA_DIR");
    manifest_opt(sv);

    // rerun
    std::string rerun_path;
    auto* rr = app.add_subcommand("rerun", "Rerun a command from its manifest and compare outputs");
    rr->add_option("--manifest", rerun_path)->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        CLI::App* cur = &app;
        while (!cur->get_subcommands().empty()) cur = cur->get_subcommands().front();
        std::cerr << "error: " << e.what() << "\n\n" << cur->help();
        return static_cast<int>(ErrorKind::Usage);
    }

    CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
    std::string command;
    for (CLI::App* a = leaf; a && a != &app; a = a->get_parent()) command = a->get_name() + (command.empty() ? "" : " " + command);
    r.m.command = command;
    r.m.argv = args;

    auto emit = [&](int code) {
        if (captured)
            *captured = r.out;
        else
            std::cout << r.out << std::flush;
        return code;
    };

    if (*ingest) {
        const auto fmt = format_for(format, in_path);
        const auto records = corpus::load_corpus(r.input(in_path), fmt);
        r.write(out_path, corpus::to_jsonl(records));
        r.m.config = {{"format", fmt == corpus::CorpusFormat::CSV ? "csv" : "jsonl"}};
        r.print("ingested " + std::to_string(records.size()) + " records\n");
        finish(r, beside(out_path));
    } else if (*filter) {
        fcfg.venue_allow_list.insert(venues.begin(), venues.end());
        if (fcfg.main_conference_only && fcfg.venue_allow_list.empty())
            fail_usage("bad_filter_config", "--main-conference-only needs at least one --venue");
        const auto records = corpus::load_corpus(r.input(in_path), format_for("", in_path));
        const auto kept = corpus::filter_corpus(records, fcfg);
        r.write(out_path, corpus::to_jsonl(kept));
        r.m.config = {{"max_abstract_words", fcfg.max_abstract_words},
                      {"abstract_words_rule", "whitespace tokens, strictly fewer than max"},
                      {"min_year", fcfg.min_year},
                      {"main_conference_only", fcfg.main_conference_only},
                      {"venues", fcfg.venue_allow_list}};
        r.print("kept " + std::to_string(kept.size()) + " of " + std::to_string(records.size()) + " records\n");
        finish(r, beside(out_path));
    } else if (*split) {
        corpus::SplitSpec spec;
        if (!spec_path.empty()) spec = corpus::spec_from_json(read_json(r.input(spec_path)));
        if (seed_flag) spec.seed = *seed_flag;
        const auto records = corpus::load_corpus(r.input(in_path), format_for("", in_path));
        const auto s = corpus::make_constrained_split(records, spec);
        const fs::path dir = out_dir;
        corpus::write_split(dir, s, spec);
        for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "split_manifest.json"}) r.m.add_output(dir / f);
        r.m.config = corpus::spec_to_json(spec);
        r.print("train " + std::to_string(s.train.size()) + ", dev " + std::to_string(s.dev.size()) + ", test " +
                std::to_string(s.test.size()) + "\n");
        finish(r, dir / "manifest.json");
    } else if (*c_create) {
        if (fs::exists(store::campaign_dir(data_dir, campaign_id) / "campaign.json"))
            fail_usage("campaign_exists", "campaign '" + campaign_id + "' already exists under " + data_dir);
        auto j = read_json(r.input(instances_path));
        if (j.is_object() && j.contains("instances")) j = j.at("instances");
        std::vector<annotation::TaskInstance> insts;
        try {
            insts = annotation::instances_from_json(j);
        } catch (const json::exception& e) {
            fail_data("bad_instances", instances_path + ": " + e.what());
        }
        annotation::AssignmentPolicy policy;
        policy.annotators = annotators;
        policy.annotators_per_instance = per_instance;
        policy.seed = seed;
        const auto c = annotation::create_campaign(campaign_id, annotation::parse_kind(kind), std::move(insts), policy,
                                                   min_ann, max_ann, criteria);
        store::save_campaign(data_dir, c);
        const auto path = store::campaign_dir(data_dir, campaign_id) / "campaign.json";
        r.m.add_output(path);
        r.m.config = {{"kind", kind},         {"annotators", annotators}, {"per_instance", per_instance},
                      {"min_annotators", min_ann}, {"max_annotators", max_ann}, {"criteria", criteria},
                      {"seed", seed}};
        r.print("created campaign '" + campaign_id + "' with " + std::to_string(c.instances.size()) + " instances\n");
        finish(r, store::campaign_dir(data_dir, campaign_id) / "create.manifest.json");
    } else if (*c_assign) {
        auto c = store::load_campaign(data_dir, campaign_id);
        if (!annotators.empty() || seed_flag) {
            if (store::has_judgments(data_dir, campaign_id))
                fail_data("assignment_locked", "campaign '" + campaign_id + "' already has judgments");
            annotation::AssignmentPolicy policy;
            policy.annotators = annotators.empty() ? std::vector<std::string>(c.annotators().begin(), c.annotators().end())
                                                   : annotators;
            policy.annotators_per_instance = per_instance;
            policy.seed = seed_flag.value_or(c.seed);
            c.seed = policy.seed;
            annotation::assign(c, policy);
            store::save_campaign(data_dir, c);
        }
        auto keys = store::AccessKeys::load(data_dir);
        std::string issued;
        for (const auto& a : c.annotators())
            if (rotate_keys || !keys.has(a)) issued += a + "\t" + keys.issue(a) + "\n";
        keys.save();
        r.m.add_output(store::campaign_dir(data_dir, campaign_id) / "campaign.json");
        r.m.config = {{"annotators", annotators}, {"per_instance", per_instance}, {"seed", c.seed},
                      {"rotate_keys", rotate_keys}, {"access_keys", "random; only their SHA-256 is stored"}};
        // Keys are printed once and never hashed into the manifest.
        r.hash_stdout = false;
        r.print(issued.empty() ? "no new keys issued\n" : issued);
        finish(r, store::campaign_dir(data_dir, campaign_id) / "assign.manifest.json");
    } else if (*c_export) {
        if (view != "annotator" && view != "analysis") fail_usage("bad_view", "--view must be annotator or analysis");
        const auto c = store::load_campaign(data_dir, campaign_id);
        r.input(store::campaign_dir(data_dir, campaign_id) / "campaign.json");
        const auto log = annotation::JudgmentLog::open(r.input(store::log_path(data_dir, campaign_id)));
        const auto state = annotation::replay(log.entries());
        r.write(out_path, annotation::export_csv(c, state,
                                                 view == "analysis" ? annotation::ExportView::Analysis
                                                                    : annotation::ExportView::Annotator));
        r.m.config = {{"view", view}};
        r.print("exported " + std::to_string(state.size()) + " judgments\n");
        finish(r, beside(out_path));
    } else if (*score) {
        annotation::Campaign c;
        annotation::EffectiveState state;
        if (!campaign_file.empty()) {
            if (export_file.empty()) fail_usage("missing_flag", "--campaign needs --export");
            c = annotation::campaign_from_json(read_json(r.input(campaign_file)));
            state = annotation::state_from_export(c, read_file(r.input(export_file)));
        } else {
            if (campaign_id.empty()) fail_usage("missing_flag", "give --id (with --data-dir) or --campaign with --export");
            c = store::load_campaign(data_dir, campaign_id);
            r.input(store::campaign_dir(data_dir, campaign_id) / "campaign.json");
            state = annotation::replay(annotation::JudgmentLog::open(r.input(store::log_path(data_dir, campaign_id))).entries());
        }
        const auto res = scoring::bws_scores(c, state);
        r.write(out_path, scoring::scores_to_csv(res.scores));
        const auto table = scoring::system_table(scoring::system_means(res.scores)).render_text();
        if (!table_out.empty()) r.write(table_out, table);
        r.m.config = {{"bws", "(n_best - n_worst) / n_annotators"},
                      {"min_annotators_per_instance", c.min_annotators_per_instance}};
        r.print(table);
        if (!res.excluded.empty())
            r.print(std::to_string(res.excluded.size()) + " instance(s) below the annotator minimum were left out\n");
        finish(r, beside(out_path));
    } else if (*rrc) {
        const auto scores = scoring::scores_from_csv(read_file(r.input(scores_path)));
        const auto js = scoring::to_relative_ranking(scores);
        r.write(out_path, rr_to_jsonl(js));
        r.m.config = {{"pairs", "every unordered pair with unequal BWS; ties dropped"}};
        r.print(std::to_string(js.size()) + " relative-ranking judgments\n");
        finish(r, beside(out_path));
    } else if (*train || *eval) {
        const auto js = rr_from_jsonl(read_file(r.input(rr_path)));
        const auto store = metric::EmbeddingStore::load(r.input(emb_path));
        std::set<std::string> abstracts;
        for (const auto& j : js) abstracts.insert(j.abstract_id);
        const auto splits = metric::make_metric_splits({abstracts.begin(), abstracts.end()}, n_splits, sizes, seed);
        if (split_index >= splits.size())
            fail_usage("bad_split", "--split must be below --n-splits (" + std::to_string(n_splits) + ")");
        const auto& sp = splits[split_index];
        json split_cfg{{"n_splits", n_splits}, {"split", split_index}, {"seed", seed},
                       {"sizes", {{"train", sizes.train}, {"dev", sizes.dev}, {"test", sizes.test}}},
                       {"split_unit", "abstract"}};
        if (*train) {
            metric::TrainConfig cfg;
            if (!config_path.empty()) cfg = metric::config_from_json(read_json(r.input(config_path)));
            cfg.seed = derive_seed(seed, "train-metric/" + std::to_string(split_index));
            if (epochs) cfg.epochs = *epochs;
            const auto tm = metric::train(metric::judgments_for(js, sp.train), metric::judgments_for(js, sp.dev), store, cfg);
            metric::save_metric(tm, out_path);
            r.m.add_output(out_path);
            r.m.config = {{"split", split_cfg}, {"train", metric::config_to_json(cfg)}, {"tau", kTauVariant}};
            const auto& best = tm.report.epochs.at(tm.report.best_epoch);
            r.print("best epoch " + std::to_string(tm.report.best_epoch) + " of " + std::to_string(tm.report.epochs.size() - 1) +
                    ", dev tau " + opt_fixed(best.dev_tau, 4) + (tm.report.stopped_early ? " (stopped early)" : "") + "\n");
            if (!tm.report.note.empty()) r.print(tm.report.note + "\n");
        } else {
            const auto tm = metric::load_metric(r.input(metric_path));
            std::vector<std::string> ids;
            if (part == "train") ids = sp.train;
            else if (part == "dev") ids = sp.dev;
            else if (part == "test") ids = sp.test;
            else if (part == "all") ids.assign(abstracts.begin(), abstracts.end());
            else fail_usage("bad_part", "--part must be train, dev, test or all");
            const auto part_js = metric::judgments_for(js, ids);
            const double tau = metric::evaluate_tau(tm, store, part_js);
            json result{{"part", part}, {"abstracts", ids.size()}, {"judgments", part_js.size()}, {"segment_tau", tau}};
            r.print("segment tau " + fixed(tau, 4) + " over " + std::to_string(part_js.size()) + " judgments\n");
            if (!scores_path.empty()) {
                std::vector<stats::SegmentScorePair> pairs;
                for (const auto& s : scoring::scores_from_csv(read_file(r.input(scores_path)))) {
                    if (!std::binary_search(ids.begin(), ids.end(), s.abstract_id)) continue;
                    pairs.push_back({s.abstract_id, s.candidate_id, s.system_tag,
                                     tm.score(store.get(s.abstract_id), store.get(s.candidate_id)), s.score});
                }
                const auto sl = stats::system_level(pairs);
                result["system_level"] = system_level_json(sl);
                r.print("system pearson " + opt_fixed(sl.pearson, 3) + ", spearman " + opt_fixed(sl.spearman, 3) + " over " +
                        std::to_string(sl.systems.size()) + " systems\n");
            }
            r.write(out_path, result.dump(2) + "\n");
            r.m.config = {{"split", split_cfg}, {"part", part}, {"tau", kTauVariant}};
        }
        finish(r, beside(out_path));
    } else if (*e_agg) {
        const auto m = humor::parse_label_matrix_csv(read_file(r.input(labels_path)));
        std::vector<std::string> warnings;
        std::vector<int> pred;
        if (method == "mv") {
            pred = humor::ens_mv(m, &warnings);
            r.m.config = {{"method", "mv"}, {"rule", "0 if #0 >= K/2+1, else 2 if #2 > #1, else 1"}};
        } else if (method == "sum") {
            pred = humor::ens_sum(m, th_i, th_j);
            r.m.config = {{"method", "sum"}, {"i", th_i}, {"j", th_j}};
        } else {
            fail_usage("bad_method", "--method must be mv or sum");
        }
        std::ostringstream csv;
        CsvWriter w(csv);
        w.row({"title_id", "label"});
        for (std::size_t c = 0; c < m.n(); ++c) w.row({m.title_ids[c], std::to_string(pred[c])});
        r.write(out_path, csv.str());
        for (const auto& wmsg : warnings) std::cerr << "warning: " << wmsg << "\n";
        std::array<std::size_t, 3> counts{};
        for (int l : pred) ++counts[static_cast<std::size_t>(l)];
        r.print("labels 0/1/2: " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                std::to_string(counts[2]) + "\n");
        finish(r, beside(out_path));
    } else if (*e_search) {
        const auto m = humor::parse_label_matrix_csv(read_file(r.input(labels_path)));
        const auto gold = humor::align_gold(m, humor::parse_gold_csv(read_file(r.input(gold_path))));
        const auto res = humor::search_thresholds(m, gold, binary ? humor::F1Mode::Binary : humor::F1Mode::ThreeWay);
        r.m.config = {{"f1", binary ? "binary macro" : "three-way macro"},
                      {"absent_class_f1", 0},
                      {"search", "0 <= i < j <= 2K; ties to smaller i, then smaller j"}};
        r.print("best i=" + std::to_string(res.i) + " j=" + std::to_string(res.j) + " macro_f1=" + fixed(res.score, 4) + "\n");
        if (res.degenerate) std::cerr << "warning: " << res.warning << "\n";
        if (!out_path.empty()) {
            r.write(out_path, json{{"i", res.i}, {"j", res.j}, {"macro_f1", res.score}, {"degenerate", res.degenerate},
                                   {"warning", res.warning}}.dump(2) + "\n");
            finish(r, beside(out_path));
        } else {
            finish(r, "ensemble-search.manifest.json");
        }
    } else if (*e_base) {
        if (stage != 1 && stage != 2) fail_usage("bad_stage", "--stage must be 1 or 2");
        const auto store = metric::EmbeddingStore::load(r.input(emb_path));
        const auto gold = humor::parse_gold_csv(read_file(r.input(gold_path)));
        std::vector<humor::LabeledTitle> pool;
        for (const auto& [id, l] : gold) pool.push_back({id, l});
        const auto spec = stage == 1 ? humor::BalancedSplitSpec::stage1(seed) : humor::BalancedSplitSpec::stage2(seed);
        const auto splits = humor::make_balanced_splits(pool, spec);
        humor::LabelMatrix m;
        for (const auto& t : pool) m.title_ids.push_back(t.id);
        for (std::size_t k = 0; k < splits.size(); ++k) {
            std::vector<std::vector<double>> xs;
            std::vector<int> ys;
            for (const auto& id : splits[k].train) {
                xs.push_back(store.get(id));
                ys.push_back(gold.at(id));
            }
            const auto clf = humor::train_baseline(xs, ys);
            std::vector<int> row;
            for (const auto& id : m.title_ids) row.push_back(clf.predict(store.get(id)));
            std::vector<int> dev_pred, dev_gold;
            for (const auto& id : splits[k].dev) {
                dev_pred.push_back(clf.predict(store.get(id)));
                dev_gold.push_back(gold.at(id));
            }
            m.classifier_ids.push_back("baseline_" + std::to_string(k));
            m.labels.push_back(std::move(row));
            r.print(m.classifier_ids.back() + " dev macro_f1=" +
                    (dev_gold.empty() ? std::string("n/a") : fixed(humor::macro_f1(dev_pred, dev_gold), 4)) + "\n");
        }
        r.write(out_path, humor::label_matrix_to_csv(m));
        const humor::BaselineConfig bc;
        r.m.config = {{"stage", stage},
                      {"seed", seed},
                      {"n_splits", spec.n_splits},
                      {"train_funny", spec.train_funny},
                      {"train_not_funny", spec.train_not_funny},
                      {"dev", "held-out funny plus as many held-out not-funny"},
                      {"baseline", {{"model", "softmax regression"}, {"l2", bc.l2}, {"learning_rate", bc.learning_rate},
                                    {"epochs", bc.epochs}}}};
        finish(r, beside(out_path));
    } else if (*hm) {
        const auto gens = humor::parse_generations_csv(read_file(r.input(gens_path)));
        const auto cm = humor::generation_control_metrics(gens);
        const auto report = humor::control_report(cm, system);
        r.print(report);
        r.m.config = {{"system", system}, {"f1", "binary macro"}, {"ratio_same", "whitespace-normalized exact match"}};
        if (!out_path.empty()) {
            r.write(out_path, report);
            finish(r, beside(out_path));
        } else {
            finish(r, "humor-metrics.manifest.json");
        }
    } else if (*p_filter) {
        auto gens = pseudo::parse_generated_jsonl(read_file(r.input(gens_path)));
        if (!labels_path.empty()) pseudo::join_labels(gens, read_file(r.input(labels_path)));
        pseudo::NgramFilterConfig cfg;
        cfg.n_values = {n_values.begin(), n_values.end()};
        cfg.max_corpus_frequency = threshold == "inf" ? std::numeric_limits<std::size_t>::max()
                                                      : static_cast<std::size_t>(parse_int(threshold, "--threshold"));
        if (scope == "funny")
            cfg.scope = pseudo::NgramScope::FunnyPseudoOnly;
        else if (scope == "all")
            cfg.scope = pseudo::NgramScope::AllPseudo;
        else
            fail_usage("bad_scope", "--scope must be funny or all");
        const bool any_label = std::any_of(gens.begin(), gens.end(), [](const auto& g) { return g.assigned_label.has_value(); });
        const auto before = gens.size();
        if (any_label) gens = pseudo::keep_label_consistent(gens);
        const auto consistent = gens.size();
        const auto res = pseudo::ngram_frequency_filter(gens, cfg);
        const auto left = pseudo::recheck(res.kept, cfg);
        if (!left.empty()) fail_data("filter_not_converged", "kept titles still hold over-threshold n-grams");
        r.write(out_path, pseudo::generated_to_jsonl(res.kept));
        if (!removed_path.empty()) r.write(removed_path, pseudo::removal_report_csv(res.removed));
        r.m.config = pseudo::ngram_config_to_json(cfg);
        r.m.config["label_consistency"] = any_label ? "applied" : "skipped (no assigned labels)";
        r.m.config["stopwords"] = std::string(corpus::kStopwordsVersion);
        r.print(std::to_string(before) + " generated, " + std::to_string(consistent) + " label-consistent, " +
                std::to_string(res.removed.size()) + " removed by the n-gram filter, " + std::to_string(res.kept.size()) +
                " kept\n");
        finish(r, beside(out_path));
    } else if (*p_merge) {
        const auto records = corpus::load_corpus(r.input(corpus_path), format_for("", corpus_path));
        const auto gens = pseudo::parse_generated_jsonl(read_file(r.input(pseudo_path)));
        const auto merged = pseudo::merge_pseudo(pseudo::originals_from_corpus(records), gens);
        r.write(out_path, pseudo::training_to_jsonl(merged.instances));
        r.m.config = {{"pairing", "one opposite-label pseudo title per original; abstracts without one are dropped"},
                      {"labels", "binary"}};
        r.print(pseudo::merge_summary(merged));
        finish(r, beside(out_path));
    } else if (*st) {
        if (pairs_path.empty() && values.empty()) fail_usage("missing_flag", "give --pairs and/or --values");
        json report = json::object();
        if (!pairs_path.empty()) {
            const auto pairs = parse_pairs_csv(read_file(r.input(pairs_path)));
            const auto sl = stats::system_level(pairs);
            report["system_level"] = system_level_json(sl);
            r.print(std::to_string(sl.systems.size()) + " systems: pearson " + opt_fixed(sl.pearson, 3) + ", spearman " +
                    opt_fixed(sl.spearman, 3) + "\n");
            if (!rr_path.empty()) {
                const auto js = rr_from_jsonl(read_file(r.input(rr_path)));
                const auto d = stats::kendall_wmt_tau_detail(js, stats::metric_table(pairs));
                report["segment_tau"] = d.tau;
                r.print("segment tau " + fixed(d.tau, 4) + " over " + std::to_string(js.size()) + " judgments\n");
            }
        }
        if (!values.empty()) {
            const auto s = stats::multi_split_summary(values);
            report["summary"] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
            r.print(std::to_string(s.n) + " splits: " + stats::format_mean_std(s) + "\n");
        }
        r.m.config = {{"tau", kTauVariant}, {"std", "sample (n - 1)"}, {"spearman_ties", "average ranks"}};
        if (!out_path.empty()) {
            r.write(out_path, report.dump(2) + "\n");
            finish(r, beside(out_path));
        } else {
            finish(r, "stats.manifest.json");
        }
    } else if (*an) {
        const auto samples = analysis::parse_samples_csv(read_file(r.input(samples_path)));
        const auto& sw = corpus::StopwordList::default_list();
        const auto rows = analysis::overlap_report(samples, sw);
        r.write(out_path, analysis::overlap_report_csv(rows, sw));
        if (!md_path.empty()) r.write(md_path, analysis::overlap_report_markdown(rows, sw));
        r.m.config = {{"stopwords", sw.version()}, {"edit_overlap", std::string(analysis::kEditOverlapDefinition)}};
        r.print(analysis::overlap_table(rows).render_text());
        finish(r, beside(out_path));
    } else if (*sv) {
        service::ServiceConfig cfg;
        if (!config_path.empty()) cfg = service::config_from_json(read_json(r.input(config_path)));
        service::apply_env_overrides(cfg);
        if (port) {
            if (*port < 0 || *port > 65535) fail_usage("bad_config", "--port out of range");
            cfg.port = *port;
        }
        if (data_dir_flag) cfg.data_dir = *data_dir_flag;
        return serve(cfg, r);
    } else if (*rr) {
        r.hash_stdout = false;
        const int code = rerun(rerun_path, r.out);
        return emit(code);
    }
    return emit(0);
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args, nullptr);
    } catch (const Error& e) {
        std::cerr << "error [" << e.reason() << "]: " << e.what() << "\n";
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error [io]: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Data);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Data);
    }
}
