#include "subfuse/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace subfuse {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_field(const std::string& field, const std::string& path, std::size_t line_no) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        std::ostringstream msg;
        msg << path << ":" << line_no << ": cannot parse '" << field << "' as a number";
        throw CsvParseError(msg.str());
    }
    return value;
}

}  // namespace

RegressionDataset read_dataset_csv(const std::string& path, bool add_intercept) {
    std::ifstream in(path);
    if (!in) throw CsvParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw CsvParseError(path + ": missing header row");
    const std::size_t columns = split_line(line).size();
    if (columns < 1) throw CsvParseError(path + ": empty header");

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line);
        if (fields.size() != columns) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected " << columns << " fields, got "
                << fields.size();
            throw CsvParseError(msg.str());
        }
        std::vector<double> row;
        row.reserve(columns);
        for (const auto& f : fields) row.push_back(parse_field(f, path, line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw CsvParseError(path + ": no data rows");

    const Index n = static_cast<Index>(rows.size());
    const Index d_raw = static_cast<Index>(columns) - 1;
    const Index d = d_raw + (add_intercept ? 1 : 0);
    RegressionDataset data;
    data.X.resize(n, d);
    data.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        Index col = 0;
        if (add_intercept) data.X(i, col++) = 1.0;
        for (Index j = 0; j < d_raw; ++j) data.X(i, col++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        data.y(i) = rows[static_cast<std::size_t>(i)][columns - 1];
    }
    return data;
}

void write_dataset_csv(const std::string& path, const RegressionDataset& data) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (Index j = 0; j < data.dim(); ++j) out << "x" << j << ",";
    out << "y\n";
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.dim(); ++j) out << format_double(data.X(i, j)) << ",";
        out << format_double(data.y(i)) << "\n";
    }
}

namespace {

const char* case_name(BiasCase c) {
    switch (c) {
        case BiasCase::SP: return "SP";
        case BiasCase::HT: return "HT";
        case BiasCase::HL: return "HL";
    }
    return "?";
}

const char* tail_name(CovariateTail t) {
    return t == CovariateTail::Normal ? "normal" : "t3";
}

}  // namespace

void write_results_csv(std::ostream& out, const ExperimentConfig& config,
                       const ExperimentResult& result) {
    out << "case,covariate_tail,estimator,rate,k_effective,emse,ebias2,evar,failures\n";
    for (const ResultRow& row : result.rows) {
        out << case_name(config.scenario.bias_case) << ','
            << tail_name(config.scenario.tail) << ',' << estimator_name(row.estimator) << ','
            << format_double(row.rate) << ',' << row.k_effective << ','
            << format_double(row.metrics.emse) << ',' << format_double(row.metrics.ebias2)
            << ',' << format_double(row.metrics.evar) << ',' << row.failures << '\n';
    }
}

void write_tuning_csv(std::ostream& out, const TuningReport& report) {
    out << "lambda,df,rss_target,rss_external,aic,bic,converged\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        out << format_double(report.grid[i]) << ',' << format_double(report.df[i]) << ','
            << format_double(report.rss_target[i]) << ','
            << format_double(report.rss_external[i]) << ',' << format_double(report.aic[i])
            << ',' << format_double(report.bic[i]) << ','
            << static_cast<int>(report.converged[i]) << '\n';
    }
}

void write_probs_csv(std::ostream& out, const Vector& scores, const Vector& pi) {
    out << "index,score,pi\n";
    for (Index e = 0; e < pi.size(); ++e) {
        out << e << ',' << format_double(scores(e)) << ',' << format_double(pi(e)) << '\n';
    }
}

void write_screening_csv(std::ostream& out, const ScreeningResult& result) {
    out << "covariate,t_stat,p_value,selected\n";
    for (const ScreeningRow& row : result.rows) {
        out << row.covariate << ',' << format_double(row.t_stat) << ','
            << format_double(row.p_value) << ',' << (row.selected ? 1 : 0) << '\n';
    }
}

}  // namespace subfuse
