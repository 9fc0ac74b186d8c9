// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cfbg/codebook.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cfbg
{

// Index of the nearest point of the uniform grid {2 pi i / grid} on the circle; ties go low.
int quantize_phase(double theta, int grid);
double grid_phase(int index, int grid);

// Codeword of a user's pilot index (bijection per half).
std::uint32_t encode_pilot(int index, UserHalf half, const CfbgCodebook &book);
// Inverse of encode_pilot followed by the index-to-phase map.
double decode_pilot(std::uint32_t codeword, UserHalf half, const CfbgCodebook &book, int grid);
int pilot_index(std::uint32_t codeword, UserHalf half, const CfbgCodebook &book);

std::vector<bool> activation_pattern(const BinaryWord &codeword);

struct ObservedCodeword
{
    BinaryWord g_c; // presence
    Digits g_b;     // counts
};

// counts in 0..3 per block
ObservedCodeword observe_pattern(const Digits &counts);

enum class Verdict
{
    NoAttack,       // three codewords, no jamming
    SilentOrAbsent, // two codewords with matching per-half digit sums
    Jamming,        // two codewords after removing a wideband contribution
    SeparationError // two-way split whose digit sums disagree
};

std::string to_string(Verdict v);

struct BdcdResult
{
    Verdict verdict = Verdict::SeparationError;
    std::vector<std::uint32_t> codewords; // sorted codebook indices
    bool ambiguous = false;               // two recovered codewords share a user half
    bool lookup_miss = false;             // the final search found nothing
};

BdcdResult bdcd_decode(const ObservedCodeword &g, const CfbgCodebook &book);

struct SepValue
{
    double sep = 0.0;
    double sep_db = 0.0;
};

// Closed-form SEP for the k = 3 regime: (7 N_B / (N_Total N_T))^3.
SepValue sep_formula(double n_b, double n_total, double n_t);

enum class EvaMode
{
    Silent,
    WidebandJamming,
    RandomImitation
};

std::string to_string(EvaMode m);
EvaMode eva_mode_from_string(const std::string &s);

enum class ImitationTarget
{
    FullCodebook,
    BobHalf,
    CharlieHalf
};

// Ideal per-block counts for one protocol round.
Digits ideal_counts(const CfbgCodebook &book, std::uint32_t bob, std::uint32_t charlie, EvaMode mode,
                    std::uint32_t eva = 0);

// One record per trial: trial|truth|verdict|codewords|ambiguous|separation|misclassified
void write_verdict_record(std::ostream &os, std::uint64_t trial, EvaMode truth, const BdcdResult &r,
                          bool misclassified);

// Verdict expected for an attack mode when detection is ideal.
Verdict expected_verdict(EvaMode mode, bool duplicate);

} // namespace cfbg
