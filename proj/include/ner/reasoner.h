#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ner/memory.h"
#include "ner/tensor.h"

namespace ner {

// Similarity between a query state and one stored feature row: the
// logistic function of their dot product. Always in (0, 1).
double kernel(const std::vector<double>& query, const std::vector<double>& feature);

// The per-token evidence consulted by upper layers: for each of the
// four feature matrices, the best kernel score over all pool rows.
// An empty pool yields all zeros, which no occupied pool can produce.
struct ReferenceVector {
    double s_fc = 0.0;
    double s_eb = 0.0;
    double s_ee = 0.0;
    double s_bc = 0.0;

    std::vector<double> as_vector() const { return {s_fc, s_eb, s_ee, s_bc}; }
};

// Pool matrices registered on a tape as constants, so reference scores
// backpropagate into the querying states but not into the rows.
struct PoolOnTape {
    Var r_fc;
    Var r_eb;
    Var r_ee;
    Var r_bc;
    int count = 0;
};

PoolOnTape pool_on_tape(Tape& tape, const CandidatePool& pool);

// Reference scores for one token as a length-4 tape value, ordered
// (s_fc, s_eb, s_ee, s_bc). The forward state queries the
// forward-derived matrices (r_fc, r_ee), the backward state the
// backward-derived ones (r_eb, r_bc).
Var reference(Tape& tape, Var h_f, Var h_b, const PoolOnTape& pool);

// Value-level scores plus the winning row per component, for traces
// and inspection. arg_* is -1 when the pool is empty.
struct ReferenceDetail {
    ReferenceVector s;
    int arg_fc = -1;
    int arg_eb = -1;
    int arg_ee = -1;
    int arg_bc = -1;
};

ReferenceDetail reference_values(const std::vector<double>& h_f, const std::vector<double>& h_b,
                                 const CandidatePool& pool);

// One trace row per token: the four scores and the row index that won
// each max. Ties go to the lowest index.
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, int sentence, int position, const std::string& token,
                     const ReferenceDetail& detail);

}  // namespace ner
