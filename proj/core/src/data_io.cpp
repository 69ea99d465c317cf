#include "mvdnmf/data_io.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvdnmf/errors.hpp"
#include "mvdnmf/inference.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvdnmf::io {

namespace {

constexpr int kModelFormatVersion = 1;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

double parse_double(const std::string& token, const std::string& context) {
    try {
        size_t consumed = 0;
        const double value = std::stod(token, &consumed);
        while (consumed < token.size() && std::isspace(static_cast<unsigned char>(token[consumed])))
            ++consumed;
        if (consumed != token.size())
            throw DataError("bad number '" + token + "' at " + context);
        return value;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError("bad number '" + token + "' at " + context);
    }
}

// Headerless CSV, one instance per row; returns instances x features.
Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string token;
        int col_no = 0;
        while (std::getline(ss, token, ',')) {
            ++col_no;
            const std::string context = path + " row " + std::to_string(line_no) +
                                        ", column " + std::to_string(col_no);
            const double value = parse_double(token, context);
            if (value < 0.0)
                throw DataError("negative entry " + format_double(value) + " at " +
                                context);
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + " row " + std::to_string(line_no) + " has " +
                            std::to_string(row.size()) + " columns, expected " +
                            std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + " is empty");
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<int> labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": bad label '" + line + "'");
        }
    }
    return labels;
}

json matrix_to_json(const Matrix& m) {
    json block;
    block["rows"] = m.rows();
    block["cols"] = m.cols();
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    block["data"] = std::move(data);
    return block;
}

Matrix matrix_from_json(const json& block) {
    const Eigen::Index rows = block.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = block.at("cols").get<Eigen::Index>();
    const json& data = block.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw DataError("matrix block has " + std::to_string(data.size()) +
                        " entries, expected " + std::to_string(rows * cols));
    Matrix m(rows, cols);
    size_t idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[idx++].get<double>();
    return m;
}

json matrices_to_json(const std::vector<Matrix>& ms) {
    json arr = json::array();
    for (const Matrix& m : ms) arr.push_back(matrix_to_json(m));
    return arr;
}

std::vector<Matrix> matrices_from_json(const json& arr) {
    std::vector<Matrix> ms;
    for (const json& block : arr) ms.push_back(matrix_from_json(block));
    return ms;
}

json load_json(const std::string& path) {
    std::ifstream in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("cannot parse " + path + ": " + e.what());
    }
}

}  // namespace

DatasetManifest read_manifest(const std::string& path) {
    const json doc = load_json(path);
    DatasetManifest manifest;
    try {
        manifest.name = doc.at("name").get<std::string>();
        manifest.num_classes = doc.at("num_classes").get<int>();
        manifest.view_paths = doc.at("views").get<std::vector<std::string>>();
        manifest.labels_path = doc.at("labels").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError("manifest " + path + ": " + e.what());
    }
    if (manifest.view_paths.empty())
        throw DataError("manifest " + path + " lists no views");
    if (manifest.num_classes < 2)
        throw DataError("manifest " + path + ": num_classes must be >= 2");
    return manifest;
}

MultiViewDataset load_dataset(const std::string& manifest_path) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();

    MultiViewDataset dataset;
    dataset.num_classes = manifest.num_classes;
    for (const std::string& rel : manifest.view_paths) {
        const Matrix instances_by_features = read_csv_matrix((base / rel).string());
        dataset.views.push_back(instances_by_features.transpose());
    }
    dataset.labels = read_labels((base / manifest.labels_path).string());

    const int n = dataset.num_instances();
    for (int v = 0; v < dataset.num_views(); ++v)
        if (dataset.views[v].cols() != n)
            throw DataError("view " + manifest.view_paths[v] + " has " +
                            std::to_string(dataset.views[v].cols()) +
                            " instances, expected " + std::to_string(n));
    if (static_cast<int>(dataset.labels.size()) != n)
        throw DataError("labels file " + manifest.labels_path + " has " +
                        std::to_string(dataset.labels.size()) + " entries, expected " +
                        std::to_string(n));
    dataset.check();
    return dataset;
}

std::string save_dataset(const MultiViewDataset& dataset, const std::string& dir,
                         const std::string& name) {
    dataset.check();
    fs::create_directories(dir);
    const fs::path base(dir);

    DatasetManifest manifest;
    manifest.name = name;
    manifest.num_classes = dataset.num_classes;
    for (int v = 0; v < dataset.num_views(); ++v) {
        const std::string filename = "view_" + std::to_string(v) + ".csv";
        manifest.view_paths.push_back(filename);
        std::ofstream out = open_output((base / filename).string());
        const Matrix& x = dataset.views[v];
        for (Eigen::Index j = 0; j < x.cols(); ++j) {  // one instance per row
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                if (i > 0) out << ',';
                out << format_double(x(i, j));
            }
            out << '\n';
        }
    }
    manifest.labels_path = "labels.txt";
    {
        std::ofstream out = open_output((base / manifest.labels_path).string());
        for (int label : dataset.labels) out << label << '\n';
    }

    json doc;
    doc["name"] = manifest.name;
    doc["num_classes"] = manifest.num_classes;
    doc["views"] = manifest.view_paths;
    doc["labels"] = manifest.labels_path;
    const std::string manifest_path = (base / "manifest.json").string();
    open_output(manifest_path) << doc.dump(2) << '\n';
    return manifest_path;
}

void save_model(const FactorModel& model, const Hyperparams& hp,
                const ModelMeta& meta, const std::string& path) {
    json doc;
    doc["format"] = "mvdnmf-model";
    doc["format_version"] = kModelFormatVersion;
    doc["num_classes"] = model.num_classes;
    doc["num_views"] = model.num_views();
    doc["dims"] = {{"k1", model.dims.k1},
                   {"k2", model.dims.k2},
                   {"k3", model.dims.k3},
                   {"k4", model.dims.k4}};
    doc["hyperparams"] = {
        {"alpha", hp.alpha},
        {"beta", hp.beta},
        {"gamma", hp.gamma},
        {"lambda_ridge", hp.lambda_ridge},
        {"loss", hp.loss == LossMode::CrossEntropy ? "ce" : "mse"},
        {"max_iters", hp.max_iters},
        {"rel_tol", hp.rel_tol},
        {"seed", hp.seed},
        {"step_shrink", hp.step_shrink},
        {"max_backtracks", hp.max_backtracks}};
    doc["meta"] = {{"iterations", meta.iterations},
                   {"final_objective", meta.final_objective},
                   {"status", meta.status}};
    doc["blocks"] = {{"w_cd", matrices_to_json(model.w_cd)},
                     {"w_cn", matrices_to_json(model.w_cn)},
                     {"w_sd", matrices_to_json(model.w_sd)},
                     {"w_sn", matrices_to_json(model.w_sn)},
                     {"h_cd", matrix_to_json(model.h_cd)},
                     {"h_cn", matrix_to_json(model.h_cn)},
                     {"h_sd", matrices_to_json(model.h_sd)},
                     {"h_sn", matrices_to_json(model.h_sn)},
                     {"b_cd", matrix_to_json(model.b_cd)},
                     {"b_sd", matrices_to_json(model.b_sd)}};
    open_output(path) << doc.dump() << '\n';
}

LoadedModel load_model(const std::string& path) {
    const json doc = load_json(path);
    try {
        if (doc.at("format").get<std::string>() != "mvdnmf-model")
            throw DataError(path + " is not a model file");
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw DataError(path + ": unsupported model format version " +
                            std::to_string(version));

        LoadedModel out;
        FactorModel& model = out.model;
        model.num_classes = doc.at("num_classes").get<int>();
        const json& dims = doc.at("dims");
        model.dims = {dims.at("k1").get<int>(), dims.at("k2").get<int>(),
                      dims.at("k3").get<int>(), dims.at("k4").get<int>()};
        const json& blocks = doc.at("blocks");
        model.w_cd = matrices_from_json(blocks.at("w_cd"));
        model.w_cn = matrices_from_json(blocks.at("w_cn"));
        model.w_sd = matrices_from_json(blocks.at("w_sd"));
        model.w_sn = matrices_from_json(blocks.at("w_sn"));
        model.h_cd = matrix_from_json(blocks.at("h_cd"));
        model.h_cn = matrix_from_json(blocks.at("h_cn"));
        model.h_sd = matrices_from_json(blocks.at("h_sd"));
        model.h_sn = matrices_from_json(blocks.at("h_sn"));
        model.b_cd = matrix_from_json(blocks.at("b_cd"));
        model.b_sd = matrices_from_json(blocks.at("b_sd"));
        if (model.num_views() != doc.at("num_views").get<int>())
            throw DataError(path + ": block view counts disagree with num_views");

        const json& hp = doc.at("hyperparams");
        out.hp.alpha = hp.at("alpha").get<double>();
        out.hp.beta = hp.at("beta").get<double>();
        out.hp.gamma = hp.at("gamma").get<double>();
        out.hp.lambda_ridge = hp.at("lambda_ridge").get<double>();
        out.hp.loss = hp.at("loss").get<std::string>() == "mse"
                          ? LossMode::SquaredError
                          : LossMode::CrossEntropy;
        out.hp.max_iters = hp.at("max_iters").get<int>();
        out.hp.rel_tol = hp.at("rel_tol").get<double>();
        out.hp.seed = hp.at("seed").get<std::uint64_t>();
        out.hp.step_shrink = hp.at("step_shrink").get<double>();
        out.hp.max_backtracks = hp.at("max_backtracks").get<int>();
        out.hp.dims = model.dims;

        const json& meta = doc.at("meta");
        out.meta.iterations = meta.at("iterations").get<int>();
        out.meta.final_objective = meta.at("final_objective").get<double>();
        out.meta.status = meta.at("status").get<std::string>();
        return out;
    } catch (const json::exception& e) {
        throw DataError("cannot read model " + path + ": " + e.what());
    }
}

void export_trace(const SolverTrace& trace, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "iteration,total,reconstruction,orthogonality,sparsity,label_loss\n";
    for (const TraceRecord& rec : trace.records)
        out << rec.iteration << ',' << format_double(rec.total) << ','
            << format_double(rec.reconstruction) << ','
            << format_double(rec.orthogonality) << ',' << format_double(rec.sparsity)
            << ',' << format_double(rec.label_loss) << '\n';
    if (!out) throw DataError("failed writing " + path);
}

void export_embeddings(const FactorModel& model, const MultiViewDataset& dataset,
                       const std::string& path) {
    if (model.num_instances() != dataset.num_instances())
        throw DataError("embeddings export: model holds " +
                        std::to_string(model.num_instances()) +
                        " instances, dataset " +
                        std::to_string(dataset.num_instances()));
    const Matrix features = discriminative_features(model);
    std::ofstream out = open_output(path);
    out << "instance,label";
    for (Eigen::Index f = 0; f < features.cols(); ++f) out << ",f" << f;
    out << '\n';
    for (Eigen::Index j = 0; j < features.rows(); ++j) {
        out << j << ',' << dataset.labels[j];
        for (Eigen::Index f = 0; f < features.cols(); ++f)
            out << ',' << format_double(features(j, f));
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + path);
}

}  // namespace mvdnmf::io
