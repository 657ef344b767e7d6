#pragma once

#include "jdmc/stats.hpp"
#include "jdmc/types.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace jdmc {

/// One line of the results table.
struct ResultRow {
    std::string estimator;
    std::string model;
    std::string payoff;
    std::int64_t trials = 0;
    double mean = 0.0;
    double var = 0.0;
    double std_error = 0.0;
    double ci99 = 0.0;
    std::optional<double> error_vs_reference;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> parameter_value;  ///< sweeps only

    static ResultRow from_stats(std::string estimator, std::string model, std::string payoff,
                                const EstimateStats& s, std::uint64_t seed,
                                std::optional<double> reference = std::nullopt) {
        ResultRow r{std::move(estimator), std::move(model), std::move(payoff), s.n, s.mean, s.var(),
                    s.std_error(), s.ci99(), std::nullopt, s.wall_seconds, seed, std::nullopt};
        if (reference) r.error_vs_reference = std::abs(s.mean - *reference);
        return r;
    }
};

/// Rows plus the name of the swept parameter, if any.
struct ResultTable {
    std::vector<ResultRow> rows;
    std::optional<std::string> parameter;
};

inline constexpr const char* kCsvHeader =
    "estimator,model,payoff,M,mean,var,stderr,ci99,error_vs_reference,wall_seconds,seed";

/// 17 significant digits: enough to round-trip any double.
inline std::string format_real(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

inline std::string to_csv(const ResultTable& table) {
    std::ostringstream out;
    out << kCsvHeader;
    if (table.parameter) out << ',' << *table.parameter;
    out << '\n';
    for (const auto& r : table.rows) {
        out << r.estimator << ',' << r.model << ',' << r.payoff << ',' << r.trials << ','
            << format_real(r.mean) << ',' << format_real(r.var) << ',' << format_real(r.std_error)
            << ',' << format_real(r.ci99) << ','
            << (r.error_vs_reference ? format_real(*r.error_vs_reference) : std::string()) << ','
            << format_real(r.wall_seconds) << ',' << r.seed;
        if (table.parameter)
            out << ',' << (r.parameter_value ? format_real(*r.parameter_value) : std::string());
        out << '\n';
    }
    return out.str();
}

/// Plain-text summary table: estimator, payoff, M, mean, error, variance, CI, time.
inline std::string to_report(const ResultTable& table) {
    std::ostringstream out;
    out << std::left << std::setw(20) << "Estimator" << std::setw(12) << "Type";
    if (table.parameter) out << std::setw(10) << *table.parameter;
    out << std::setw(12) << "M" << std::setw(14) << "Mean" << std::setw(12) << "Error"
        << std::setw(12) << "Var" << std::setw(12) << "99% CI" << "Time(s)\n";
    for (const auto& r : table.rows) {
        out << std::setw(20) << r.estimator << std::setw(12) << r.payoff;
        if (table.parameter) out << std::setw(10) << (r.parameter_value ? *r.parameter_value : NAN);
        out << std::setw(12) << r.trials << std::setw(14) << std::setprecision(6) << r.mean
            << std::setw(12);
        if (r.error_vs_reference)
            out << std::setprecision(4) << *r.error_vs_reference;
        else
            out << "-";
        out << std::setw(12) << std::setprecision(4) << r.var << std::setw(12)
            << std::setprecision(3) << r.ci99 << std::setprecision(4) << r.wall_seconds << '\n';
    }
    return out.str();
}

/// Writes `path` (CSV) and `path.txt` (report). I/O failures throw IoError.
inline void emit_results(const ResultTable& table, const std::string& path) {
    auto write = [](const std::string& p, const std::string& body) {
        std::ofstream f(p);
        if (!f) throw IoError("cannot open '" + p + "' for writing");
        f << body;
        f.flush();
        if (!f) throw IoError("write to '" + p + "' failed");
    };
    write(path, to_csv(table));
    write(path + ".txt", to_report(table));
}

}  // namespace jdmc
