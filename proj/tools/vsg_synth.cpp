// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0
//
// Synthetic embedding datasets for head training experiments: two Gaussian
// clusters, optionally pre-split into train/val/test files.

#include <array>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vsg/errors.hpp"
#include "vsg/eval_lab.hpp"
#include "vsg/head_trainer.hpp"
#include "vsg/types.hpp"

int main(int argc, char** argv) {
  CLI::App app{"two-cluster embedding dataset generator"};

  long n_per_class = 1000;
  long dim = vsg::kEmbedDim;
  float sigma = 0.1f;
  float separation = 1.0f;
  std::uint64_t seed = 1;
  std::string out;
  std::string out_train;
  std::string out_val;
  std::string out_test;
  std::array<double, 3> ratios = {0.70, 0.15, 0.15};

  app.add_option("--n-per-class", n_per_class, "examples per class");
  app.add_option("--dim", dim, "embedding dimension");
  app.add_option("--sigma", sigma, "per-dimension standard deviation");
  app.add_option("--separation", separation, "distance between class centers");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--out", out, "write the whole dataset to one file");
  app.add_option("--out-train", out_train, "write the train split here");
  app.add_option("--out-val", out_val, "write the validation split here");
  app.add_option("--out-test", out_test, "write the test split here");
  app.add_option("--ratios", ratios, "train/val/test ratios for the split outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const bool split_requested = !out_train.empty() || !out_val.empty() || !out_test.empty();
    if (out.empty() && !split_requested) {
      vsg::raise(vsg::Err::OutOfRange, "nothing to write: pass --out or --out-train/--out-val/--out-test");
    }
    if (split_requested && (out_train.empty() || out_val.empty() || out_test.empty())) {
      vsg::raise(vsg::Err::OutOfRange, "split output needs all of --out-train, --out-val, --out-test");
    }

    const vsg::EmbeddingDataset ds =
        vsg::make_two_cluster_dataset(n_per_class, dim, sigma, separation, seed);
    if (!out.empty()) {
      vsg::save_dataset(ds, out);
      std::printf("wrote %s (%lld examples, dim %lld)\n", out.c_str(),
                  static_cast<long long>(ds.size()), static_cast<long long>(ds.dim()));
    }
    if (split_requested) {
      const vsg::SplitIndices split = vsg::stratified_split(ds.labels, ratios, seed);
      vsg::save_dataset(vsg::gather(ds, split.train), out_train);
      vsg::save_dataset(vsg::gather(ds, split.val), out_val);
      vsg::save_dataset(vsg::gather(ds, split.test), out_test);
      std::printf("wrote %s (%zu), %s (%zu), %s (%zu)\n", out_train.c_str(), split.train.size(),
                  out_val.c_str(), split.val.size(), out_test.c_str(), split.test.size());
    }
    return 0;
  } catch (const vsg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
