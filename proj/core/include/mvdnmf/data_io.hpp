#pragma once

#include <string>

#include "mvdnmf/model.hpp"

namespace mvdnmf::io {

// On-disk dataset description. View and label paths are resolved
// relative to the manifest's directory.
struct DatasetManifest {
    std::string name;
    int num_classes = 0;
    std::vector<std::string> view_paths;
    std::string labels_path;
};

DatasetManifest read_manifest(const std::string& path);

// Loads a dataset from a manifest. View files are headerless CSV, one
// instance per row, features per column; they are transposed to the
// internal features x instances orientation. The labels file holds one
// integer per line, -1 meaning unlabeled.
MultiViewDataset load_dataset(const std::string& manifest_path);

// Writes manifest, view CSVs and labels under dir; returns the manifest
// path.
std::string save_dataset(const MultiViewDataset& dataset, const std::string& dir,
                         const std::string& name);

struct ModelMeta {
    int iterations = 0;
    double final_objective = 0;
    std::string status;
};

// Model persistence: one self-describing JSON document with a format
// version, dimensions, hyperparameters, fit metadata and row-major
// arrays per block. Numeric round-trip is lossless.
void save_model(const FactorModel& model, const Hyperparams& hp,
                const ModelMeta& meta, const std::string& path);

struct LoadedModel {
    FactorModel model;
    Hyperparams hp;
    ModelMeta meta;
};

LoadedModel load_model(const std::string& path);

// CSV with header iteration,total,reconstruction,orthogonality,sparsity,
// label_loss, one row per iteration, 17 significant digits.
void export_trace(const SolverTrace& trace, const std::string& path);

// CSV with header instance,label,f0,f1,...: instance id, label (-1 when
// unlabeled) and the discriminative feature row.
void export_embeddings(const FactorModel& model, const MultiViewDataset& dataset,
                       const std::string& path);

}  // namespace mvdnmf::io
