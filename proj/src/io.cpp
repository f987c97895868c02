#include "sobocal/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sobocal {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const MatrixXd& rows, const std::vector<std::string>& comments) {
    if ((Index)header.size() != rows.cols())
        throw ShapeError("write_csv: header width does not match row width");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& c : comments) out << "# " << c << "\n";
    for (size_t j = 0; j < header.size(); ++j)
        out << header[j] << (j + 1 < header.size() ? "," : "\n");
    for (Index i = 0; i < rows.rows(); ++i)
        for (Index j = 0; j < rows.cols(); ++j)
            out << format_double(rows(i, j)) << (j + 1 < rows.cols() ? "," : "\n");
    if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& tok, const std::string& path, int lineno) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": malformed number '" + tok + "'");
    }
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset '" + path + "'");
    std::string line;
    int lineno = 0;
    // skip comments, find header
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw IoError(path + ": missing header row");
    const int cols = (int)header.size();
    if (cols < 2 || header.back() != "y")
        throw IoError(path + ":" + std::to_string(lineno) + ": header must be x1,...,xd,y");
    for (int j = 0; j + 1 < cols; ++j)
        if (header[j] != "x" + std::to_string(j + 1))
            throw IoError(path + ":" + std::to_string(lineno) + ": header must be x1,...,xd,y");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto toks = split_csv_line(line);
        if ((int)toks.size() != cols)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(cols) + " fields, got " + std::to_string(toks.size()));
        std::vector<double> row(cols);
        for (int j = 0; j < cols; ++j) row[j] = parse_double(toks[j], path, lineno);
        rows.push_back(std::move(row));
    }

    Dataset data;
    data.x.resize((Index)rows.size(), cols - 1);
    data.y.resize((Index)rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j + 1 < cols; ++j) data.x((Index)i, j) = rows[i][j];
        data.y[(Index)i] = rows[i][cols - 1];
    }
    data.validate();
    return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& comments) {
    std::vector<std::string> header;
    for (int j = 0; j < data.d(); ++j) header.push_back("x" + std::to_string(j + 1));
    header.push_back("y");
    MatrixXd rows(data.n(), data.d() + 1);
    rows.leftCols(data.d()) = data.x;
    rows.col(data.d()) = data.y;
    write_csv(path, header, rows, comments);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);  // allow comments
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

json make_manifest(const std::string& subcommand, const std::string& config_path,
                   const json& resolved_config, uint64_t seed, const std::string& outdir) {
    json m;
    m["tool"] = "sobocal";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["config_file"] = config_path;
    m["config"] = resolved_config;
    m["seed"] = seed;
    m["output_dir"] = outdir;
    return m;
}

std::vector<std::string> manifest_comments(const json& manifest) {
    std::vector<std::string> out;
    out.push_back("sobocal " + std::string(kToolVersion) + " " +
                  manifest.value("subcommand", std::string("?")));
    out.push_back("seed=" + std::to_string(manifest.value("seed", (uint64_t)0)));
    return out;
}

}  // namespace sobocal
