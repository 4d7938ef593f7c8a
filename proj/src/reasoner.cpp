#include "ner/reasoner.h"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "ner/error.h"

namespace ner {

double kernel(const std::vector<double>& query, const std::vector<double>& feature) {
    if (query.size() != feature.size())
        throw DimensionError("kernel operands differ in size: " + std::to_string(query.size()) +
                             " vs " + std::to_string(feature.size()));
    double dot = 0.0;
    for (size_t i = 0; i < query.size(); ++i) dot += query[i] * feature[i];
    return 1.0 / (1.0 + std::exp(-dot));
}

PoolOnTape pool_on_tape(Tape& tape, const CandidatePool& pool) {
    PoolOnTape p;
    p.count = pool.count();
    if (p.count == 0) return p;
    p.r_fc = tape.constant(pool.r_fc);
    p.r_eb = tape.constant(pool.r_eb);
    p.r_ee = tape.constant(pool.r_ee);
    p.r_bc = tape.constant(pool.r_bc);
    return p;
}

namespace {

// max_i sigmoid(rows_i . query) as a scalar tape value.
Var best_score(Tape& tape, Var rows, Var query) {
    Var scores = tape.sigmoid(tape.matmul(rows, query));  // {N}
    Var grid = tape.reshape(scores, {tape.value(scores).rows(), 1});
    return tape.max_over_rows(grid);  // {1}
}

}  // namespace

Var reference(Tape& tape, Var h_f, Var h_b, const PoolOnTape& pool) {
    if (pool.count == 0) return tape.constant(Tensor::zeros({4}));
    Var s_fc = best_score(tape, pool.r_fc, h_f);
    Var s_eb = best_score(tape, pool.r_eb, h_b);
    Var s_ee = best_score(tape, pool.r_ee, h_f);
    Var s_bc = best_score(tape, pool.r_bc, h_b);
    return tape.concat({s_fc, s_eb, s_ee, s_bc});
}

namespace {

void best_value(const Tensor& rows, const std::vector<double>& query, double* score, int* arg) {
    *score = 0.0;
    *arg = -1;
    for (int i = 0; i < rows.rows(); ++i) {
        double dot = 0.0;
        for (int j = 0; j < rows.cols(); ++j)
            dot += rows.at(i, j) * query[static_cast<size_t>(j)];
        double s = 1.0 / (1.0 + std::exp(-dot));
        if (*arg < 0 || s > *score) {
            *score = s;
            *arg = i;
        }
    }
}

}  // namespace

ReferenceDetail reference_values(const std::vector<double>& h_f, const std::vector<double>& h_b,
                                 const CandidatePool& pool) {
    ReferenceDetail d;
    if (pool.count() == 0) return d;
    if (static_cast<int>(h_f.size()) != pool.dim() ||
        static_cast<int>(h_b.size()) != pool.dim())
        throw DimensionError("query size does not match pool dim " + std::to_string(pool.dim()));
    best_value(pool.r_fc, h_f, &d.s.s_fc, &d.arg_fc);
    best_value(pool.r_eb, h_b, &d.s.s_eb, &d.arg_eb);
    best_value(pool.r_ee, h_f, &d.s.s_ee, &d.arg_ee);
    best_value(pool.r_bc, h_b, &d.s.s_bc, &d.arg_bc);
    return d;
}

void write_trace_header(std::ostream& out) {
    out << "sentence,position,token,s_fc,s_eb,s_ee,s_bc,arg_fc,arg_eb,arg_ee,arg_bc\n";
}

void write_trace_row(std::ostream& out, int sentence, int position, const std::string& token,
                     const ReferenceDetail& detail) {
    std::string safe = token;
    for (char& c : safe)
        if (c == ',') c = ';';
    out << sentence << ',' << position << ',' << safe << ',' << std::setprecision(6)
        << std::fixed << detail.s.s_fc << ',' << detail.s.s_eb << ',' << detail.s.s_ee << ','
        << detail.s.s_bc << ',' << detail.arg_fc << ',' << detail.arg_eb << ',' << detail.arg_ee
        << ',' << detail.arg_bc << "\n";
    out << std::defaultfloat;
}

}  // namespace ner
