// SPDX-License-Identifier: MIT
//
// migsys — migration-system discovery from origin x destination x time flow
// data: masked nonnegative tensor co-clustering, rank selection, community
// reports, and a walktrap graph-clustering baseline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "migsys/community.hpp"
#include "migsys/io.hpp"
#include "migsys/selection.hpp"
#include "migsys/solver.hpp"
#include "migsys/synth.hpp"
#include "migsys/version.hpp"
#include "migsys/walktrap.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int default_threads() {
    if (const char* env = std::getenv("MIGSYS_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return 1;
}

std::string join_args(int argc, char** argv) {
    std::ostringstream ss;
    for (int i = 0; i < argc; ++i) {
        if (i) ss << ' ';
        ss << argv[i];
    }
    return ss.str();
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

struct SchemaFlags {
    std::string origin_col = "origin";
    std::string dest_col = "dest";
    std::string period_col = "period";
    std::string count_col = "count";
    std::string delimiter;  // "", "," or "tab"
    std::string suppressed_token = "d";
    bool real_counts = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--origin-col", origin_col, "Header name of the origin id column");
        cmd->add_option("--dest-col", dest_col, "Header name of the destination id column");
        cmd->add_option("--period-col", period_col, "Header name of the period label column");
        cmd->add_option("--count-col", count_col, "Header name of the count column");
        cmd->add_option("--delimiter", delimiter,
                        "Field delimiter: ',' or 'tab' (default: sniffed from the header)");
        cmd->add_option("--suppressed-token", suppressed_token,
                        "Count token marking privacy-suppressed cells");
        cmd->add_flag("--real-counts", real_counts,
                      "Accept non-integer counts (estimated flows)");
    }

    migsys::EdgeListSchema to_schema() const {
        migsys::EdgeListSchema s;
        s.origin_col = origin_col;
        s.dest_col = dest_col;
        s.period_col = period_col;
        s.count_col = count_col;
        if (delimiter == "tab" || delimiter == "\\t")
            s.delimiter = '\t';
        else if (!delimiter.empty())
            s.delimiter = delimiter[0];
        s.suppressed_token = suppressed_token;
        s.integer_counts = !real_counts;
        return s;
    }
};

migsys::FactorModel ranked_model(const migsys::FactorModel& model) {
    return migsys::reorder_components(model, migsys::rank_communities(model));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"migsys " + std::string(migsys::kVersion) +
                 " — spatio-temporal migration-system discovery"};
    app.require_subcommand(1);
    const std::string command_line = join_args(argc, argv);

    // ---- ingest ----------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Parse an edge list into a tensor bundle");
    std::string in_path, out_path;
    SchemaFlags schema_flags;
    ingest->add_option("--input", in_path, "Delimited edge-list file")->required();
    ingest->add_option("--output", out_path, "Tensor bundle output path")->required();
    schema_flags.attach(ingest);

    // ---- fit -------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Fit the masked nonnegative CP model");
    std::string fit_in, fit_out;
    migsys::FitOptions fit_opts;
    fit_opts.threads = default_threads();
    std::string mask_strategy = "exact";
    fit_cmd->add_option("--input", fit_in, "Tensor bundle")->required();
    fit_cmd->add_option("--output", fit_out, "Model document output path")->required();
    fit_cmd->add_option("--rank", fit_opts.F, "Number of systems F")
        ->required()
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--seed", fit_opts.seed, "Base seed (restart r uses seed + r)");
    fit_cmd->add_option("--restarts", fit_opts.restarts, "Independent restarts")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--tol", fit_opts.tol, "Relative loss-change stopping threshold")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--max-iters", fit_opts.max_outer_iters, "Outer iteration cap")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--inner-iters", fit_opts.inner_iters, "HALS sweeps per factor")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--mask-strategy", mask_strategy, "exact | em")
        ->check(CLI::IsMember({"exact", "em"}));
    fit_cmd->add_option("--threads", fit_opts.threads,
                        "Restart-level parallelism (default $MIGSYS_THREADS or 1)")
        ->check(CLI::PositiveNumber);

    // ---- rank-scan -------------------------------------------------------
    auto* scan_cmd = app.add_subcommand("rank-scan", "Residual curve over F = 1..max-rank");
    std::string scan_in, scan_out;
    int max_rank = 8;
    double tau = 0.01;
    migsys::FitOptions scan_opts;
    scan_opts.threads = default_threads();
    scan_cmd->add_option("--input", scan_in, "Tensor bundle")->required();
    scan_cmd->add_option("--max-rank", max_rank, "Largest F to try")
        ->required()
        ->check(CLI::PositiveNumber);
    scan_cmd->add_option("--tau", tau, "Elbow improvement threshold")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--output", scan_out, "Optional curve table output (TSV)");
    scan_cmd->add_option("--seed", scan_opts.seed, "Base seed");
    scan_cmd->add_option("--restarts", scan_opts.restarts, "Independent restarts per F")
        ->check(CLI::PositiveNumber);
    scan_cmd->add_option("--tol", scan_opts.tol, "Stopping threshold")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--max-iters", scan_opts.max_outer_iters, "Outer iteration cap")
        ->check(CLI::PositiveNumber);
    scan_cmd->add_option("--threads", scan_opts.threads, "Restart-level parallelism")
        ->check(CLI::PositiveNumber);

    // ---- report ----------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "Community report tables from a model");
    std::string report_model, report_prefix;
    int top_k = 10;
    double shock_z = 3.0;
    report_cmd->add_option("--model", report_model, "Model document")->required();
    report_cmd->add_option("--out-prefix", report_prefix, "Output path prefix")->required();
    report_cmd->add_option("--top-k", top_k, "Members per side per community")
        ->check(CLI::PositiveNumber);
    report_cmd->add_option("--shock-z", shock_z, "Shock detection z threshold")
        ->check(CLI::PositiveNumber);

    // ---- partition -------------------------------------------------------
    auto* part_cmd = app.add_subcommand("partition", "Hard community partition from a model");
    std::string part_model, part_out, part_side = "origin";
    int smooth_k = 0;
    part_cmd->add_option("--model", part_model, "Model document")->required();
    part_cmd->add_option("--output", part_out, "Partition table output path")->required();
    part_cmd->add_option("--side", part_side, "origin | destination")
        ->check(CLI::IsMember({"origin", "destination"}));
    part_cmd->add_option("--smooth-k", smooth_k,
                         "k for the optional nearest-neighbor smoothing pass (0 = off)")
        ->check(CLI::NonNegativeNumber);

    // ---- walktrap --------------------------------------------------------
    auto* wt_cmd = app.add_subcommand("walktrap", "Pre/post walktrap baseline comparison");
    std::string wt_in, wt_split, wt_focal, wt_prefix;
    int walk_length = 4;
    SchemaFlags wt_schema;
    wt_cmd->add_option("--input", wt_in, "Delimited edge-list file")->required();
    wt_cmd->add_option("--split", wt_split, "Split period label (excluded from both sides)")
        ->required();
    wt_cmd->add_option("--focal", wt_focal, "Focal node id to track")->required();
    wt_cmd->add_option("--out-prefix", wt_prefix, "Output path prefix")->required();
    wt_cmd->add_option("--walk-length", walk_length, "Random-walk length t")
        ->check(CLI::PositiveNumber);
    wt_schema.attach(wt_cmd);

    // ---- synth -----------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "Planted tensor bundle with ground truth");
    std::string synth_spec, synth_bundle, synth_truth;
    synth_cmd->add_option("--spec", synth_spec, "Plant spec (JSON)")->required();
    synth_cmd->add_option("--out-bundle", synth_bundle, "Tensor bundle output path")->required();
    synth_cmd->add_option("--out-truth", synth_truth, "Ground-truth model output path")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        Timer timer;

        if (*ingest) {
            const auto schema = schema_flags.to_schema();
            const auto loaded = migsys::load_edge_list(in_path, schema);
            std::cout << "records kept: " << loaded.records.size()
                      << "\nself-flows dropped: " << loaded.counters.self_flows
                      << "\nsuppressed dropped: " << loaded.counters.suppressed
                      << "\nmissing dropped: " << loaded.counters.missing << "\n";
            if (loaded.records.empty()) {
                std::cerr << "error: no usable records in '" << in_path << "'\n";
                return kExitData;
            }
            auto bundle =
                migsys::build_tensor(loaded.records, migsys::periods_from_records(loaded.records));
            bundle.counters = loaded.counters;
            migsys::write_tensor_bundle(bundle, out_path);
            std::cout << "tensor: " << bundle.X.dim0() << " x " << bundle.X.dim1() << " x "
                      << bundle.X.dim2() << " -> " << out_path << "\n";
            migsys::write_manifest(out_path, command_line,
                                   {{"origin_col", schema.origin_col},
                                    {"dest_col", schema.dest_col},
                                    {"period_col", schema.period_col},
                                    {"count_col", schema.count_col},
                                    {"suppressed_token", schema.suppressed_token},
                                    {"integer_counts", schema.integer_counts}},
                                   {in_path}, 0, timer.seconds());
            return kExitOk;
        }

        if (*fit_cmd) {
            const auto bundle = migsys::read_tensor_bundle(fit_in);
            migsys::FitOptions opts = fit_opts;
            opts.mask_strategy = (mask_strategy == "em") ? migsys::MaskStrategy::EmImpute
                                                         : migsys::MaskStrategy::ExactMasked;
            const auto result = migsys::fit(bundle.X, bundle.mask, opts);
            if (!result.model.A.allFinite() || !result.model.B.allFinite() ||
                !result.model.C.allFinite()) {
                std::cerr << "error: fit produced non-finite factors\n";
                return kExitNumerical;
            }
            const double data_norm = migsys::apply_mask(bundle.mask, bundle.X).frobenius_norm();
            const double rel =
                data_norm > 0 ? result.loss_trace.back() / data_norm : 0.0;
            std::cout << "rank: " << opts.F << "\nmasked residual: " << result.loss_trace.back()
                      << "\nrelative residual: " << rel
                      << "\nconverged: " << (result.converged ? "yes" : "no")
                      << "\niterations: " << result.iterations_used
                      << "\nbest seed: " << result.seed_used << "\n";
            for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
            migsys::export_model(result.model, bundle.registry, bundle.axis, fit_out);
            std::cout << "model -> " << fit_out << "\n";
            migsys::write_manifest(fit_out, command_line,
                                   {{"rank", opts.F},
                                    {"restarts", opts.restarts},
                                    {"tol", opts.tol},
                                    {"max_iters", opts.max_outer_iters},
                                    {"inner_iters", opts.inner_iters},
                                    {"mask_strategy", mask_strategy},
                                    {"threads", opts.threads}},
                                   {fit_in}, opts.seed, timer.seconds());
            return kExitOk;
        }

        if (*scan_cmd) {
            const auto bundle = migsys::read_tensor_bundle(scan_in);
            const auto curve = migsys::rank_scan(bundle.X, bundle.mask, max_rank, scan_opts);
            const int selected = migsys::select_rank(curve, tau);
            std::ostringstream table;
            table << "F\trelative_residual\tbest_seed\n";
            for (const auto& pt : curve.entries)
                table << pt.F << "\t" << pt.relative_residual << "\t" << pt.best_seed << "\n";
            std::cout << table.str() << "selected rank: " << selected << "\n";
            if (!scan_out.empty()) {
                std::ofstream out(scan_out);
                if (!out) throw std::runtime_error("cannot open '" + scan_out + "' for writing");
                out << table.str();
                migsys::write_manifest(scan_out, command_line,
                                       {{"max_rank", max_rank},
                                        {"tau", tau},
                                        {"restarts", scan_opts.restarts},
                                        {"tol", scan_opts.tol},
                                        {"max_iters", scan_opts.max_outer_iters},
                                        {"threads", scan_opts.threads}},
                                       {scan_in}, scan_opts.seed, timer.seconds());
            }
            return kExitOk;
        }

        if (*report_cmd) {
            const auto doc = migsys::import_model(report_model);
            const migsys::NodeRegistry registry(doc.origin_ids);
            const migsys::PeriodAxis axis(doc.period_labels);
            const auto model = ranked_model(doc.model);
            int k = top_k;
            const int dim = std::min(model.origins(), model.destinations());
            if (k > dim) {
                std::cout << "warning: --top-k " << k << " clamped to dimension " << dim << "\n";
                k = dim;
            }
            std::vector<migsys::CommunityReport> reports;
            for (int f = 0; f < model.components(); ++f)
                reports.push_back(migsys::make_report(model, f, k, &registry, shock_z));
            const auto written = migsys::write_reports(reports, axis, report_prefix);
            for (const auto& p : written) std::cout << "wrote " << p << "\n";
            migsys::write_manifest(report_prefix + "_report.json", command_line,
                                   {{"top_k", k}, {"shock_z", shock_z}}, {report_model}, 0,
                                   timer.seconds());
            return kExitOk;
        }

        if (*part_cmd) {
            const auto doc = migsys::import_model(part_model);
            const migsys::NodeRegistry registry(doc.origin_ids);
            const auto model = ranked_model(doc.model);
            const auto side =
                part_side == "destination" ? migsys::Side::Destination : migsys::Side::Origin;
            const auto part = migsys::hard_partition(model, side, smooth_k);
            migsys::write_partition_table(part, registry, part_out);
            std::cout << "communities: " << part.communities
                      << "\nzero-membership nodes: " << part.zero_rows.size() << "\npartition -> "
                      << part_out << "\n";
            migsys::write_manifest(part_out, command_line,
                                   {{"side", part_side}, {"smooth_k", smooth_k}}, {part_model}, 0,
                                   timer.seconds());
            return kExitOk;
        }

        if (*wt_cmd) {
            const auto loaded = migsys::load_edge_list(wt_in, wt_schema.to_schema());
            if (loaded.records.empty()) {
                std::cerr << "error: no usable records in '" << wt_in << "'\n";
                return kExitData;
            }
            const auto axis = migsys::periods_from_records(loaded.records);
            const auto res =
                migsys::compare_pre_post(loaded.records, axis, wt_split, wt_focal, walk_length);

            const std::string pre_path = wt_prefix + "_pre.tsv";
            const std::string post_path = wt_prefix + "_post.tsv";
            const std::string focal_path = wt_prefix + "_focal.tsv";
            auto write_side = [&](const migsys::GraphPartition& part, const std::string& path) {
                std::ofstream out(path);
                if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
                out << "node_id\tcommunity\n";
                for (int i = 0; i < res.registry.size(); ++i)
                    out << res.registry.id(i) << "\t" << part.labels[i] << "\n";
            };
            write_side(res.pre, pre_path);
            write_side(res.post, post_path);
            {
                std::ofstream out(focal_path);
                if (!out) throw std::runtime_error("cannot open '" + focal_path + "' for writing");
                out << "side\tnode_id\n";
                for (const auto& id : res.focal_pre_members) out << "pre\t" << id << "\n";
                for (const auto& id : res.focal_post_members) out << "post\t" << id << "\n";
            }
            std::cout << "pre: " << res.pre.communities << " communities, modularity "
                      << res.pre.modularity << "\npost: " << res.post.communities
                      << " communities, modularity " << res.post.modularity
                      << "\nfocal community size pre: " << res.focal_pre_members.size()
                      << "\nfocal community size post: " << res.focal_post_members.size() << "\n"
                      << "wrote " << pre_path << ", " << post_path << ", " << focal_path << "\n";
            migsys::write_manifest(pre_path, command_line,
                                   {{"split", wt_split},
                                    {"focal", wt_focal},
                                    {"walk_length", walk_length}},
                                   {wt_in}, 0, timer.seconds());
            return kExitOk;
        }

        if (*synth_cmd) {
            const auto spec_doc = migsys::detail::parse_json_file(synth_spec, "synth spec");
            migsys::PlantSpec spec;
            spec.I = spec_doc.value("I", spec.I);
            spec.J = spec_doc.value("J", spec.J);
            spec.K = spec_doc.value("K", spec.K);
            spec.F = spec_doc.value("F", spec.F);
            spec.origin_support = spec_doc.value("origin_support", spec.origin_support);
            spec.dest_support = spec_doc.value("dest_support", spec.dest_support);
            spec.overlap_allowed = spec_doc.value("overlap_allowed", spec.overlap_allowed);
            spec.noise_sigma = spec_doc.value("noise_sigma", spec.noise_sigma);
            spec.seed = spec_doc.value("seed", spec.seed);
            if (spec.I != spec.J) {
                std::cerr << "error: synth bundles require I == J (shared node universe)\n";
                return kExitUsage;
            }

            const auto truth = migsys::plant_model(spec);
            auto [X, mask] = migsys::synth_tensor(truth, spec.noise_sigma, spec.seed + 1);

            std::vector<std::string> ids;
            char buf[16];
            for (int i = 0; i < spec.I; ++i) {
                std::snprintf(buf, sizeof buf, "n%04d", i);
                ids.emplace_back(buf);
            }
            std::vector<std::string> labels;
            for (int k = 0; k < spec.K; ++k) {
                std::snprintf(buf, sizeof buf, "t%03d", k);
                labels.emplace_back(buf);
            }
            migsys::TensorBundle bundle;
            bundle.X = std::move(X);
            bundle.mask = mask;
            bundle.registry = migsys::NodeRegistry(ids);
            bundle.axis = migsys::PeriodAxis(labels);
            migsys::write_tensor_bundle(bundle, synth_bundle);
            migsys::export_model(truth, bundle.registry, bundle.axis, synth_truth);
            std::cout << "bundle -> " << synth_bundle << "\ntruth -> " << synth_truth << "\n";
            migsys::write_manifest(synth_bundle, command_line,
                                   {{"I", spec.I},
                                    {"J", spec.J},
                                    {"K", spec.K},
                                    {"F", spec.F},
                                    {"origin_support", spec.origin_support},
                                    {"dest_support", spec.dest_support},
                                    {"overlap_allowed", spec.overlap_allowed},
                                    {"noise_sigma", spec.noise_sigma}},
                                   {synth_spec}, spec.seed, timer.seconds());
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
