#ifndef QSPEC_IO_HPP
#define QSPEC_IO_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspec/cvm.hpp"
#include "qspec/errors.hpp"
#include "qspec/harness.hpp"
#include "qspec/pointwise.hpp"
#include "qspec/series.hpp"

// File formats: CSV series ingestion, spectrum/experiment serialization,
// experiment configs and the median-spectrum reference fixture (both JSON).
// Numbers are written with 17 significant digits so a write/read round trip
// reproduces every double exactly.

namespace qspec {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

inline double parse_finite(const std::string& cell, std::size_t row, std::size_t col) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    double value = 0.0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
        throw parse_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                          ": cannot parse '" + cell + "' as a finite number");
    }
    return value;
}

}  // namespace detail

/// Reads one column of a CSV file as a Series, preserving row order. The
/// column is selected by 1-based index, or by header name when has_header is
/// set. Missing or non-numeric cells are errors.
inline Series read_series_csv(const std::string& path, const std::string& column,
                              bool has_header) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw schema_error("'" + path + "' is empty");

    std::size_t col_index = 0;  // 0-based
    std::size_t first_data_row = 0;
    if (has_header) {
        const auto header = detail::split_csv_line(lines[0]);
        first_data_row = 1;
        bool found = false;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == column) {
                col_index = i;
                found = true;
                break;
            }
        }
        if (!found) {
            // fall back to a numeric index
            int idx = 0;
            const auto res = std::from_chars(column.data(), column.data() + column.size(), idx);
            if (res.ec != std::errc() || res.ptr != column.data() + column.size() || idx < 1)
                throw schema_error("column '" + column + "' not found in header of '" + path + "'");
            col_index = static_cast<std::size_t>(idx - 1);
        }
    } else {
        int idx = 1;
        if (!column.empty()) {
            const auto res = std::from_chars(column.data(), column.data() + column.size(), idx);
            if (res.ec != std::errc() || res.ptr != column.data() + column.size() || idx < 1)
                throw schema_error("headerless file needs a 1-based column index, got '" + column +
                                   "'");
        }
        col_index = static_cast<std::size_t>(idx - 1);
    }

    std::vector<double> values;
    values.reserve(lines.size() - first_data_row);
    for (std::size_t r = first_data_row; r < lines.size(); ++r) {
        const auto cells = detail::split_csv_line(lines[r]);
        if (col_index >= cells.size())
            throw schema_error("row " + std::to_string(r + 1) + " of '" + path + "' has only " +
                               std::to_string(cells.size()) + " columns");
        values.push_back(detail::parse_finite(cells[col_index], r + 1, col_index + 1));
    }
    return Series(std::move(values), path);
}

/// Writes a series as a headerless single-column CSV, round-trip exact.
inline void write_series_csv(const std::string& path, const Series& series) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    for (double v : series.values()) out << detail::format_double(v) << "\n";
}

struct SpectrumRecord {
    double lambda = 0.0;
    std::optional<double> tau;
    double estimate = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<double> null_value;
};

inline void write_spectrum_csv(const std::string& path, const std::vector<SpectrumRecord>& records) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    out << "lambda,tau,estimate,lower,upper,null_value\n";
    for (const auto& r : records) {
        out << detail::format_double(r.lambda) << ",";
        if (r.tau) out << detail::format_double(*r.tau);
        out << "," << detail::format_double(r.estimate) << ",";
        if (r.lower) out << detail::format_double(*r.lower);
        out << ",";
        if (r.upper) out << detail::format_double(*r.upper);
        out << ",";
        if (r.null_value) out << detail::format_double(*r.null_value);
        out << "\n";
    }
}

inline void write_spectrum_json(const std::string& path, const std::vector<SpectrumRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        json obj;
        obj["lambda"] = r.lambda;
        obj["tau"] = r.tau ? json(*r.tau) : json(nullptr);
        obj["estimate"] = r.estimate;
        obj["lower"] = r.lower ? json(*r.lower) : json(nullptr);
        obj["upper"] = r.upper ? json(*r.upper) : json(nullptr);
        obj["null_value"] = r.null_value ? json(*r.null_value) : json(nullptr);
        arr.push_back(std::move(obj));
    }
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    out << arr.dump(2) << "\n";
}

inline json cvm_to_json(const CvmResult& r) {
    json obj;
    obj["method"] = r.procedure == CvmResult::Procedure::monte_carlo ? "cvm-mc" : "cvm-bootstrap";
    obj["tau"] = r.tau;
    obj["statistic"] = r.statistic;
    obj["critical_value"] = r.critical_value;
    obj["p_value"] = r.p_value;
    obj["alpha"] = r.alpha;
    obj["decision"] = r.reject ? "reject" : "accept";
    obj["replications"] = r.replications;
    obj["block_size"] = r.block_size ? json(*r.block_size) : json(nullptr);
    obj["seed"] = r.seed;
    obj["known_quantile"] = r.known_quantile ? json(*r.known_quantile) : json(nullptr);
    return obj;
}

inline json pointwise_to_json(const PointwiseTestReport& r) {
    json obj;
    obj["method"] = "pointwise";
    obj["tau"] = r.tau;
    obj["lambda"] = r.lambda;
    obj["lambda_snapped"] = r.lambda_snapped;
    obj["statistic"] = r.qbar;
    obj["lower"] = r.lower;
    obj["upper"] = r.upper;
    obj["null_value"] = r.null_value;
    obj["p_value"] = r.p_value;
    obj["alpha"] = r.alpha;
    obj["k"] = r.k;
    obj["decision"] = r.reject ? "reject" : "accept";
    return obj;
}

inline MedianReference load_median_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open reference fixture '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw parse_error("reference fixture '" + path + "': " + e.what());
    }
    MedianReference ref;
    try {
        ref.seed = doc.at("seed").get<std::uint64_t>();
        ref.n = doc.at("n").get<std::size_t>();
        ref.bandwidth_c = doc.at("bandwidth_c").get<double>();
        ref.tau = doc.at("tau").get<double>();
        ref.freqs = doc.at("freqs").get<std::vector<double>>();
        ref.values = doc.at("values").get<std::vector<double>>();
        for (const auto& t : doc.at("targets")) {
            ref.targets.emplace_back(t.at(0).get<double>(), t.at(1).get<double>());
        }
    } catch (const json::exception& e) {
        throw schema_error("reference fixture '" + path + "': " + e.what());
    }
    if (ref.freqs.size() != ref.values.size() || ref.freqs.size() < 2)
        throw schema_error("reference fixture '" + path + "': freqs/values size mismatch");
    return ref;
}

inline void save_median_reference(const std::string& path, const MedianReference& ref) {
    json doc;
    doc["process"] = "ar2";
    doc["tau"] = ref.tau;
    doc["n"] = ref.n;
    doc["seed"] = ref.seed;
    doc["bandwidth_c"] = ref.bandwidth_c;
    doc["kernel"] = "quadratic_spectral";
    doc["freqs"] = ref.freqs;
    doc["values"] = ref.values;
    json targets = json::array();
    for (const auto& [l, v] : ref.targets) targets.push_back(json::array({l, v}));
    doc["targets"] = std::move(targets);
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << "\n";
}

inline ExperimentConfig read_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open config '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw parse_error("config '" + path + "': " + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.type = doc.at("type").get<std::string>();
        cfg.process = doc.value("process", cfg.process);
        cfg.theta = doc.value("theta", cfg.theta);
        if (doc.contains("contamination") && !doc["contamination"].is_null()) {
            const auto& c = doc["contamination"];
            ContaminationSpec spec;
            spec.p = c.at("p").get<double>();
            const std::string noise = c.value("noise", std::string("t"));
            if (noise == "cauchy") {
                spec.noise = ContaminationSpec::Noise::cauchy;
            } else if (noise == "t" || noise == "student_t") {
                spec.noise = ContaminationSpec::Noise::student_t;
                spec.nu = c.at("nu").get<double>();
            } else {
                throw schema_error("config: unknown contamination noise '" + noise + "'");
            }
            cfg.contamination = spec;
        }
        cfg.n_values = doc.at("n").get<std::vector<std::size_t>>();
        if (doc.contains("tau")) cfg.taus = doc["tau"].get<std::vector<double>>();
        cfg.classical = doc.value("classical", cfg.classical);
        if (doc.contains("k")) cfg.k_values = doc["k"].get<std::vector<int>>();
        if (doc.contains("lambda")) cfg.lambdas = doc["lambda"].get<std::vector<double>>();
        if (doc.contains("bandwidth_factors"))
            cfg.bandwidth_factors = doc["bandwidth_factors"].get<std::vector<double>>();
        cfg.bandwidth_c = doc.value("bandwidth_c", cfg.bandwidth_c);
        cfg.kernel = doc.value("kernel", cfg.kernel);
        cfg.alpha = doc.value("alpha", cfg.alpha);
        cfg.replications = doc.value("replications", cfg.replications);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.test = doc.value("test", cfg.test);
        cfg.warp_speed = doc.value("warp_speed", cfg.warp_speed);
        cfg.test_replications = doc.value("test_replications", cfg.test_replications);
        cfg.shared_null_draws = doc.value("shared_null_draws", cfg.shared_null_draws);
        if (doc.contains("block_sizes")) cfg.block_sizes = doc["block_sizes"].get<std::vector<int>>();
        cfg.median_reference = doc.value("median_reference", cfg.median_reference);
        cfg.threads = doc.value("threads", cfg.threads);
        cfg.burn_in = doc.value("burn_in", cfg.burn_in);
    } catch (const json::exception& e) {
        throw schema_error("config '" + path + "': " + e.what());
    }
    return cfg;
}

namespace detail {

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace detail

inline void write_experiment_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    out << "experiment,process,method,n,tau,k,block_size,lambda,c,estimate,mc_se,replications,"
           "target\n";
    for (const auto& cell : result.cells) {
        out << cell.experiment << "," << cell.process << "," << cell.method << "," << cell.n << ",";
        out << detail::opt_cell(cell.tau) << ",";
        out << (cell.k ? std::to_string(*cell.k) : std::string()) << ",";
        out << (cell.block_size ? std::to_string(*cell.block_size) : std::string()) << ",";
        out << detail::opt_cell(cell.lambda) << ",";
        out << detail::opt_cell(cell.c) << ",";
        if (cell.not_applicable) {
            out << "NA,,";
        } else {
            out << detail::format_double(cell.estimate) << "," << detail::format_double(cell.mc_se)
                << ",";
        }
        out << cell.replications << "," << detail::opt_cell(cell.target) << "\n";
    }
}

inline json experiment_to_json(const ExperimentResult& result) {
    json arr = json::array();
    for (const auto& cell : result.cells) {
        json obj;
        obj["experiment"] = cell.experiment;
        obj["process"] = cell.process;
        obj["method"] = cell.method;
        obj["n"] = cell.n;
        obj["tau"] = cell.tau ? json(*cell.tau) : json(nullptr);
        obj["k"] = cell.k ? json(*cell.k) : json(nullptr);
        obj["block_size"] = cell.block_size ? json(*cell.block_size) : json(nullptr);
        obj["lambda"] = cell.lambda ? json(*cell.lambda) : json(nullptr);
        obj["c"] = cell.c ? json(*cell.c) : json(nullptr);
        if (cell.not_applicable) {
            obj["estimate"] = json(nullptr);
            obj["mc_se"] = json(nullptr);
        } else {
            obj["estimate"] = cell.estimate;
            obj["mc_se"] = cell.mc_se;
        }
        obj["replications"] = cell.replications;
        obj["target"] = cell.target ? json(*cell.target) : json(nullptr);
        arr.push_back(std::move(obj));
    }
    json doc;
    doc["cells"] = std::move(arr);
    doc["wall_seconds"] = result.wall_seconds;
    return doc;
}

inline void write_experiment_json(const std::string& path, const ExperimentResult& result) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    out << experiment_to_json(result).dump(2) << "\n";
}

}  // namespace qspec

#endif  // QSPEC_IO_HPP
