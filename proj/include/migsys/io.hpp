// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "migsys/community.hpp"
#include "migsys/model.hpp"
#include "migsys/registry.hpp"
#include "migsys/tensor.hpp"
#include "migsys/version.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Edge-list ingestion. Input is delimited text (comma or tab) with a header
// row; the schema maps column names to roles. Self-flows and rows with
// missing or suppressed counts are dropped and counted, never imputed.
// ---------------------------------------------------------------------------

struct FlowRecord {
    std::string origin;
    std::string dest;
    std::string period;  ///< label, resolved against a PeriodAxis later
    double count = 0.0;
};

struct EdgeListSchema {
    std::string origin_col = "origin";
    std::string dest_col = "dest";
    std::string period_col = "period";
    std::string count_col = "count";
    char delimiter = '\0';                ///< '\0' = sniff from header (tab else comma)
    std::string suppressed_token = "d";   ///< IRS-style privacy suppression marker
    bool integer_counts = true;           ///< reject fractional counts when true
};

struct IngestCounters {
    std::size_t self_flows = 0;
    std::size_t suppressed = 0;
    std::size_t missing = 0;
};

struct LoadResult {
    std::vector<FlowRecord> records;
    IngestCounters counters;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

inline double parse_count(const std::string& s, const std::string& where, bool integer_counts) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
        throw std::runtime_error(where + ": unparseable count '" + s + "'");
    if (!std::isfinite(v)) throw std::runtime_error(where + ": non-finite count");
    if (v < 0.0) throw std::runtime_error(where + ": negative count");
    if (integer_counts && v != std::floor(v))
        throw std::runtime_error(where + ": non-integer count '" + s +
                                 "' (schema expects integer counts)");
    return v;
}

}  // namespace detail

/// Parse a delimited edge-list file. Rows with missing or suppressed counts
/// and self-flows are dropped and counted; malformed rows raise an error
/// carrying the line number.
inline LoadResult load_edge_list(const std::string& path, const EdgeListSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_edge_list: cannot open '" + path + "'");

    LoadResult res;
    std::string line;
    if (!std::getline(in, line)) return res;  // empty file: no records, zero counters
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const char delim =
        schema.delimiter != '\0' ? schema.delimiter
                                 : (line.find('\t') != std::string::npos ? '\t' : ',');
    const auto header = detail::split_line(line, delim);
    auto col_of = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return static_cast<int>(c);
        throw std::invalid_argument("load_edge_list: schema column '" + name +
                                    "' not found in header");
    };
    const int ci_origin = col_of(schema.origin_col);
    const int ci_dest = col_of(schema.dest_col);
    const int ci_period = col_of(schema.period_col);
    const int ci_count = col_of(schema.count_col);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto fields = detail::split_line(line, delim);
        if (fields.size() != header.size())
            throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                                     " fields, got " + std::to_string(fields.size()));
        FlowRecord rec;
        rec.origin = fields[ci_origin];
        rec.dest = fields[ci_dest];
        rec.period = fields[ci_period];
        if (rec.origin.empty() || rec.dest.empty() || rec.period.empty())
            throw std::runtime_error(where + ": empty origin, destination, or period field");
        if (rec.origin == rec.dest) {
            ++res.counters.self_flows;
            continue;
        }
        const std::string& count_field = fields[ci_count];
        if (count_field.empty()) {
            ++res.counters.missing;
            continue;
        }
        if (count_field == schema.suppressed_token) {
            ++res.counters.suppressed;
            continue;
        }
        rec.count = detail::parse_count(count_field, where, schema.integer_counts);
        res.records.push_back(std::move(rec));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Tensor construction and window aggregation.
// ---------------------------------------------------------------------------

struct TensorBundle {
    Tensor3 X;
    Mask mask = Mask::diagonal_off(1, 1, 1);
    NodeRegistry registry;
    PeriodAxis axis;
    IngestCounters counters;
};

/// Period axis over the sorted unique labels appearing in the records.
inline PeriodAxis periods_from_records(const std::vector<FlowRecord>& records) {
    std::vector<std::string> labels;
    labels.reserve(records.size());
    for (const auto& r : records) labels.push_back(r.period);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    // Numeric labels sort numerically.
    bool numeric = !labels.empty();
    std::vector<long long> nums;
    for (const auto& s : labels) {
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            numeric = false;
            break;
        }
        nums.push_back(v);
    }
    if (numeric)
        std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
            long long va = 0, vb = 0;
            std::from_chars(a.data(), a.data() + a.size(), va);
            std::from_chars(b.data(), b.data() + b.size(), vb);
            return va < vb;
        });
    if (labels.empty()) throw std::invalid_argument("periods_from_records: no records");
    return PeriodAxis(labels);
}

/// Sum record counts into an origin x destination x period tensor with a
/// diagonal-off mask. The registry covers every id seen (sorted order), or a
/// supplied fixed universe; records outside a fixed universe are an error
/// listing the offenders.
inline TensorBundle build_tensor(const std::vector<FlowRecord>& records, const PeriodAxis& axis,
                                 const std::optional<NodeRegistry>& universe = std::nullopt) {
    if (records.empty()) throw std::invalid_argument("build_tensor: no records");
    NodeRegistry registry;
    if (universe) {
        registry = *universe;
        std::vector<std::string> offenders;
        for (const auto& r : records) {
            if (!registry.contains(r.origin)) offenders.push_back(r.origin);
            if (!registry.contains(r.dest)) offenders.push_back(r.dest);
        }
        if (!offenders.empty()) {
            std::sort(offenders.begin(), offenders.end());
            offenders.erase(std::unique(offenders.begin(), offenders.end()), offenders.end());
            std::string msg = "build_tensor: ids outside the fixed universe:";
            for (const auto& o : offenders) msg += " " + o;
            throw std::runtime_error(msg);
        }
    } else {
        std::vector<std::string> ids;
        ids.reserve(records.size() * 2);
        for (const auto& r : records) {
            ids.push_back(r.origin);
            ids.push_back(r.dest);
        }
        registry = NodeRegistry::from_unsorted(std::move(ids));
    }

    const int n = registry.size();
    const int K = axis.size();
    TensorBundle bundle;
    bundle.X = Tensor3(n, n, K);
    bundle.mask = Mask::diagonal_off(n, n, K);
    bundle.registry = std::move(registry);
    bundle.axis = axis;
    for (const auto& r : records) {
        if (!(r.count >= 0.0) || !std::isfinite(r.count))
            throw std::invalid_argument("build_tensor: record counts must be finite and >= 0");
        if (!bundle.axis.contains(r.period))
            throw std::runtime_error("build_tensor: record period '" + r.period +
                                     "' not on the period axis");
        bundle.X(bundle.registry.index_of(r.origin), bundle.registry.index_of(r.dest),
                 bundle.axis.index_of(r.period)) += r.count;
    }
    return bundle;
}

/// Elementwise sum of the per-period flow matrices with labels in
/// [from_label, to_label], diagonal zeroed.
inline Eigen::MatrixXd aggregate_window(const std::vector<FlowRecord>& records,
                                        const PeriodAxis& axis, const NodeRegistry& registry,
                                        const std::string& from_label,
                                        const std::string& to_label) {
    const int from = axis.index_of(from_label);
    const int to = axis.index_of(to_label);
    if (from > to) throw std::invalid_argument("aggregate_window: empty period range");
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(registry.size(), registry.size());
    for (const auto& r : records) {
        const int k = axis.index_of(r.period);
        if (k < from || k > to) continue;
        W(registry.index_of(r.origin), registry.index_of(r.dest)) += r.count;
    }
    W.diagonal().setZero();
    return W;
}

// ---------------------------------------------------------------------------
// Model and tensor-bundle documents (versioned JSON, stable key order).
// ---------------------------------------------------------------------------

struct ModelDocument {
    FactorModel model;
    std::vector<std::string> origin_ids;
    std::vector<std::string> destination_ids;
    std::vector<std::string> period_labels;
};

namespace detail {

inline nlohmann::json matrix_columns(const Eigen::MatrixXd& M) {
    nlohmann::json cols = nlohmann::json::array();
    for (Eigen::Index f = 0; f < M.cols(); ++f) {
        nlohmann::json col = nlohmann::json::array();
        for (Eigen::Index r = 0; r < M.rows(); ++r) col.push_back(M(r, f));
        cols.push_back(std::move(col));
    }
    return cols;
}

inline Eigen::MatrixXd columns_matrix(const nlohmann::json& cols, int rows, int F,
                                      const std::string& name) {
    if (!cols.is_array() || static_cast<int>(cols.size()) != F)
        throw std::runtime_error("model document: '" + name + "' has wrong column count");
    Eigen::MatrixXd M(rows, F);
    for (int f = 0; f < F; ++f) {
        const auto& col = cols[f];
        if (!col.is_array() || static_cast<int>(col.size()) != rows)
            throw std::runtime_error("model document: '" + name + "' column " +
                                     std::to_string(f) + " has wrong length");
        for (int r = 0; r < rows; ++r) M(r, f) = col[r].get<double>();
    }
    return M;
}

inline nlohmann::json parse_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(what + ": cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(what + ": '" + path + "' is not valid JSON (" + e.what() + ")");
    }
}

inline void write_json_file(const nlohmann::json& doc, const std::string& path,
                            const std::string& what) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(what + ": cannot open '" + path + "' for writing");
    out << doc.dump(1, '\t') << "\n";
    if (!out) throw std::runtime_error(what + ": failed writing '" + path + "'");
}

}  // namespace detail

constexpr int kModelFormatVersion = 1;
constexpr int kTensorFormatVersion = 1;

/// Write a fitted model with its node ids and period labels. Factors
/// round-trip exactly (shortest-representation doubles); metadata exactly.
inline void export_model(const FactorModel& model, const NodeRegistry& registry,
                         const PeriodAxis& axis, const std::string& path) {
    if (!model.dims_consistent())
        throw std::invalid_argument("export_model: inconsistent model dimensions");
    if (registry.size() == 0) throw std::invalid_argument("export_model: empty registry");
    if (registry.size() != model.origins() || registry.size() != model.destinations())
        throw std::invalid_argument("export_model: registry size does not match model");
    if (axis.size() != model.periods())
        throw std::invalid_argument("export_model: period axis does not match model");

    nlohmann::json doc;
    doc["format"] = "migsys-model";
    doc["format_version"] = kModelFormatVersion;
    doc["components"] = model.components();
    nlohmann::json lam = nlohmann::json::array();
    for (int f = 0; f < model.components(); ++f) lam.push_back(model.lambda(f));
    doc["lambda"] = std::move(lam);
    doc["A"] = detail::matrix_columns(model.A);
    doc["B"] = detail::matrix_columns(model.B);
    doc["C"] = detail::matrix_columns(model.C);
    doc["origin_ids"] = registry.ids();
    doc["destination_ids"] = registry.ids();
    doc["period_labels"] = axis.labels();
    detail::write_json_file(doc, path, "export_model");
}

inline ModelDocument import_model(const std::string& path) {
    const auto doc = detail::parse_json_file(path, "import_model");
    if (!doc.contains("format") || doc["format"] != "migsys-model")
        throw std::runtime_error("import_model: '" + path + "' is not a model document");
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kModelFormatVersion)
        throw std::runtime_error("import_model: unsupported format version in '" + path + "'");

    ModelDocument md;
    try {
        md.origin_ids = doc.at("origin_ids").get<std::vector<std::string>>();
        md.destination_ids = doc.at("destination_ids").get<std::vector<std::string>>();
        md.period_labels = doc.at("period_labels").get<std::vector<std::string>>();
        const int F = doc.at("components").get<int>();
        const int I = static_cast<int>(md.origin_ids.size());
        const int J = static_cast<int>(md.destination_ids.size());
        const int K = static_cast<int>(md.period_labels.size());
        if (F < 1 || I < 1 || J < 1 || K < 1)
            throw std::runtime_error("model document: empty dimension");
        const auto lam = doc.at("lambda");
        if (!lam.is_array() || static_cast<int>(lam.size()) != F)
            throw std::runtime_error("model document: lambda has wrong length");
        md.model = FactorModel(I, J, K, F);
        for (int f = 0; f < F; ++f) md.model.lambda(f) = lam[f].get<double>();
        md.model.A = detail::columns_matrix(doc.at("A"), I, F, "A");
        md.model.B = detail::columns_matrix(doc.at("B"), J, F, "B");
        md.model.C = detail::columns_matrix(doc.at("C"), K, F, "C");
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("import_model: malformed document '" + path + "' (" + e.what() +
                                 ")");
    }
    if (!md.model.A.allFinite() || !md.model.B.allFinite() || !md.model.C.allFinite() ||
        !md.model.lambda.allFinite())
        throw std::runtime_error("import_model: non-finite values in '" + path + "'");
    return md;
}

/// Write a tensor bundle: dims, node ids, period labels, dense values, mask.
inline void write_tensor_bundle(const TensorBundle& bundle, const std::string& path) {
    if (bundle.registry.size() != bundle.X.dim0() || bundle.registry.size() != bundle.X.dim1())
        throw std::invalid_argument("write_tensor_bundle: registry does not match tensor");
    if (bundle.axis.size() != bundle.X.dim2())
        throw std::invalid_argument("write_tensor_bundle: period axis does not match tensor");
    if (!bundle.mask.matches(bundle.X))
        throw std::invalid_argument("write_tensor_bundle: mask does not match tensor");

    nlohmann::json doc;
    doc["format"] = "migsys-tensor";
    doc["format_version"] = kTensorFormatVersion;
    doc["node_ids"] = bundle.registry.ids();
    doc["period_labels"] = bundle.axis.labels();
    doc["values"] = bundle.X.data();  // row-major (i, j, k)
    if (bundle.mask.kind() == Mask::Kind::DiagonalOff) {
        doc["mask"] = "diagonal-off";
    } else {
        std::vector<int> w;
        w.reserve(bundle.X.size());
        for (int i = 0; i < bundle.X.dim0(); ++i)
            for (int j = 0; j < bundle.X.dim1(); ++j)
                for (int k = 0; k < bundle.X.dim2(); ++k) w.push_back(bundle.mask.weight(i, j, k));
        doc["mask"] = std::move(w);
    }
    doc["counters"] = {{"self_flows", bundle.counters.self_flows},
                       {"suppressed", bundle.counters.suppressed},
                       {"missing", bundle.counters.missing}};
    detail::write_json_file(doc, path, "write_tensor_bundle");
}

inline TensorBundle read_tensor_bundle(const std::string& path) {
    const auto doc = detail::parse_json_file(path, "read_tensor_bundle");
    if (!doc.contains("format") || doc["format"] != "migsys-tensor")
        throw std::runtime_error("read_tensor_bundle: '" + path + "' is not a tensor bundle");
    if (!doc.contains("format_version") ||
        doc["format_version"].get<int>() != kTensorFormatVersion)
        throw std::runtime_error("read_tensor_bundle: unsupported format version in '" + path +
                                 "'");
    TensorBundle bundle;
    try {
        bundle.registry = NodeRegistry(doc.at("node_ids").get<std::vector<std::string>>());
        bundle.axis = PeriodAxis(doc.at("period_labels").get<std::vector<std::string>>());
        const int n = bundle.registry.size();
        const int K = bundle.axis.size();
        auto values = doc.at("values").get<std::vector<double>>();
        bundle.X = Tensor3(n, n, K, std::move(values));
        const auto& mask = doc.at("mask");
        if (mask.is_string() && mask.get<std::string>() == "diagonal-off") {
            bundle.mask = Mask::diagonal_off(n, n, K);
        } else if (mask.is_array()) {
            auto w = mask.get<std::vector<int>>();
            std::vector<std::uint8_t> wb(w.begin(), w.end());
            bundle.mask = Mask::explicit_mask(n, n, K, std::move(wb));
        } else {
            throw std::runtime_error("tensor bundle: unrecognized mask field");
        }
        if (doc.contains("counters")) {
            bundle.counters.self_flows = doc["counters"].value("self_flows", 0u);
            bundle.counters.suppressed = doc["counters"].value("suppressed", 0u);
            bundle.counters.missing = doc["counters"].value("missing", 0u);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_tensor_bundle: malformed document '" + path + "' (" +
                                 e.what() + ")");
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("read_tensor_bundle: invalid document '" + path + "' (" +
                                 e.what() + ")");
    }
    if (!is_valid_flow_data(bundle.X))
        throw std::runtime_error("read_tensor_bundle: values must be finite and >= 0");
    return bundle;
}

// ---------------------------------------------------------------------------
// Delimited table writers (stable orders, lossless doubles).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, buf + n);
}

}  // namespace detail

/// Two-column (node id, community) table, registry order.
inline void write_partition_table(const Partition& part, const NodeRegistry& registry,
                                  const std::string& path) {
    if (static_cast<int>(part.labels.size()) != registry.size())
        throw std::invalid_argument("write_partition_table: registry size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_partition_table: cannot open '" + path + "'");
    out << "node_id\tcommunity\n";
    for (int i = 0; i < registry.size(); ++i)
        out << registry.id(i) << "\t" << part.labels[i] << "\n";
}

/// Plot-ready report tables plus one machine-readable JSON document.
/// Writes <prefix>_origins.tsv, <prefix>_destinations.tsv,
/// <prefix>_profiles.tsv, <prefix>_associations.tsv, <prefix>_shocks.tsv,
/// <prefix>_report.json; rows ordered by (community rank, membership desc).
inline std::vector<std::string> write_reports(const std::vector<CommunityReport>& reports,
                                              const PeriodAxis& axis,
                                              const std::string& prefix) {
    std::vector<std::string> written;
    auto open = [&](const std::string& suffix) {
        const std::string path = prefix + suffix;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("write_reports: cannot open '" + path + "'");
        written.push_back(path);
        return out;
    };

    {
        auto out = open("_origins.tsv");
        out << "community\tnode_id\tmembership\n";
        for (const auto& rep : reports)
            for (const auto& m : rep.top_origins)
                out << rep.rank_by_lambda << "\t" << m.id << "\t"
                    << detail::fmt_double(m.membership) << "\n";
    }
    {
        auto out = open("_destinations.tsv");
        out << "community\tnode_id\tmembership\n";
        for (const auto& rep : reports)
            for (const auto& m : rep.top_destinations)
                out << rep.rank_by_lambda << "\t" << m.id << "\t"
                    << detail::fmt_double(m.membership) << "\n";
    }
    {
        auto out = open("_profiles.tsv");
        out << "community\tperiod\tintensity\n";
        for (const auto& rep : reports)
            for (int k = 0; k < rep.profile.size(); ++k)
                out << rep.rank_by_lambda << "\t" << axis.label(k) << "\t"
                    << detail::fmt_double(rep.profile(k)) << "\n";
    }
    {
        auto out = open("_associations.tsv");
        out << "community\torigin_id\tdest_id\tweight\n";
        for (const auto& rep : reports)
            for (int i = 0; i < rep.association.rows(); ++i)
                for (int j = 0; j < rep.association.cols(); ++j)
                    out << rep.rank_by_lambda << "\t" << rep.top_origins[i].id << "\t"
                        << rep.top_destinations[j].id << "\t"
                        << detail::fmt_double(rep.association(i, j)) << "\n";
    }
    {
        auto out = open("_shocks.tsv");
        out << "community\tperiod\n";
        for (const auto& rep : reports)
            for (int k : rep.shock_flags) out << rep.rank_by_lambda << "\t" << axis.label(k) << "\n";
    }
    {
        nlohmann::json doc;
        doc["format"] = "migsys-report";
        doc["format_version"] = 1;
        doc["period_labels"] = axis.labels();
        nlohmann::json comms = nlohmann::json::array();
        for (const auto& rep : reports) {
            nlohmann::json c;
            c["rank"] = rep.rank_by_lambda;
            c["component"] = rep.component;
            c["lambda"] = rep.lambda;
            nlohmann::json tops = nlohmann::json::array();
            for (const auto& m : rep.top_origins)
                tops.push_back({{"id", m.id}, {"membership", m.membership}});
            c["top_origins"] = std::move(tops);
            nlohmann::json topd = nlohmann::json::array();
            for (const auto& m : rep.top_destinations)
                topd.push_back({{"id", m.id}, {"membership", m.membership}});
            c["top_destinations"] = std::move(topd);
            nlohmann::json assoc = nlohmann::json::array();
            for (int i = 0; i < rep.association.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int j = 0; j < rep.association.cols(); ++j)
                    row.push_back(rep.association(i, j));
                assoc.push_back(std::move(row));
            }
            c["association"] = std::move(assoc);
            nlohmann::json prof = nlohmann::json::array();
            for (int k = 0; k < rep.profile.size(); ++k) prof.push_back(rep.profile(k));
            c["profile"] = std::move(prof);
            nlohmann::json shocks = nlohmann::json::array();
            for (int k : rep.shock_flags) shocks.push_back(axis.label(k));
            c["shock_periods"] = std::move(shocks);
            comms.push_back(std::move(c));
        }
        doc["communities"] = std::move(comms);
        detail::write_json_file(doc, prefix + "_report.json", "write_reports");
        written.push_back(prefix + "_report.json");
    }
    return written;
}

// ---------------------------------------------------------------------------
// Run manifests: command line, options, input digests, version, wall time.
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit digest of a file's bytes, as "fnv1a64:<hex>".
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_digest: cannot open '" + path + "'");
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

/// Write <output_path>.manifest.json describing a command invocation.
inline void write_manifest(const std::string& output_path, const std::string& command_line,
                           const nlohmann::json& options,
                           const std::vector<std::string>& input_paths, std::uint64_t seed,
                           double wall_seconds) {
    nlohmann::json doc;
    doc["command"] = command_line;
    doc["options"] = options;
    doc["seed"] = seed;
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& p : input_paths) inputs[p] = file_digest(p);
    doc["inputs"] = std::move(inputs);
    doc["version"] = kVersion;
    doc["wall_time_seconds"] = wall_seconds;
    detail::write_json_file(doc, output_path + ".manifest.json", "write_manifest");
}

}  // namespace migsys
