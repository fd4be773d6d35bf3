#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmover/record.hpp"
#include "xmover/remap.hpp"
#include "xmover/vecspace.hpp"

namespace xmover::testing {

// A synthetic bilingual world: target vectors are rotated source vectors plus
// noise, sentences come from a Markov chain over word ids, and translations
// keep the ids. Hypotheses are corrupted by substitutions and position swaps;
// the planted human score is minus the total corruption.
struct PlantedWorldOptions {
  int dim = 32;
  int vocab = 2500;
  double noise = 1.25;
  int segments = 300;
  int substitution_levels = 4;  // 0 .. levels-1, each step replaces 15% of tokens
  int scramble_levels = 3;      // 0 .. levels-1 random position swaps
  int lm_sentences = 3000;
  int successors = 6;
  int min_length = 8;
  int max_length = 14;
  std::uint64_t seed = 7;
};

struct PlantedWorld {
  EmbeddingSpace source;  // no IDF attached
  EmbeddingSpace target;
  Matrix rotation;        // target ~ source * rotation
  BilingualLexicon lexicon;
  std::vector<EvaluationRecord> records;
  std::vector<TokenList> target_corpus;
};

PlantedWorld make_planted_world(const PlantedWorldOptions& options = {});

// Random orthogonal d x d matrix.
Matrix random_rotation(int d, std::uint64_t seed);

// Spaces with IDF computed from the records the way the command-line tool does.
std::pair<EmbeddingSpace, EmbeddingSpace> with_dataset_idf(const PlantedWorld& world);

// Writes src.vec, tgt.vec, lexicon.tsv, dataset.tsv and corpus.txt.
void write_planted_world(const PlantedWorld& world, const std::string& directory);

}  // namespace xmover::testing
