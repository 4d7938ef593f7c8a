#include "ner/tensor.h"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "ner/error.h"

namespace ner {

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw DimensionError("non-positive extent in shape " + shape_str(shape));
        n *= d;
    }
    t.shape = std::move(shape);
    t.values.assign(static_cast<size_t>(n), 0.0);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t;
    t.shape = {1};
    t.values = {v};
    return t;
}

Tensor Tensor::vec(std::vector<double> v) {
    Tensor t;
    t.shape = {static_cast<int>(v.size())};
    t.values = std::move(v);
    return t;
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v) {
    if (static_cast<int64_t>(v.size()) != static_cast<int64_t>(rows) * cols)
        throw DimensionError("matrix data size does not match " + shape_str({rows, cols}));
    Tensor t;
    t.shape = {rows, cols};
    t.values = std::move(v);
    return t;
}

int64_t Tensor::size() const {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

void Tensor::ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Var Tape::push(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::check_valid(Var v, const char* op) const {
    if (!v.valid() || static_cast<size_t>(v.id) >= nodes_.size())
        throw ContractError(std::string(op) + ": invalid tape handle");
}

std::vector<double>& Tape::grad_buf(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.size() != n.value.values.size()) n.grad.assign(n.value.values.size(), 0.0);
    return n.grad;
}

Var Tape::leaf(const TensorPtr& t) {
    if (!t) throw ContractError("leaf: null tensor");
    Var v = push(*t);
    node(v).param = t;
    return v;
}

Var Tape::constant(Tensor t) {
    return push(std::move(t));
}

const Tensor& Tape::value(Var v) const {
    check_valid(v, "value");
    return node(v).value;
}

const std::vector<double>& Tape::node_grad(Var v) const {
    check_valid(v, "node_grad");
    return node(v).grad;
}

Var Tape::matmul(Var a, Var b) {
    check_valid(a, "matmul");
    check_valid(b, "matmul");
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (A.ndim() != 2 || (B.ndim() != 2 && B.ndim() != 1))
        throw DimensionError("matmul: unsupported ranks " + shape_str(A.shape) + " x " + shape_str(B.shape));
    int m = A.rows(), k = A.cols();
    bool vec_rhs = B.ndim() == 1;
    int bk = vec_rhs ? B.shape[0] : B.rows();
    int n = vec_rhs ? 1 : B.cols();
    if (k != bk)
        throw DimensionError("matmul: inner dimensions disagree " + shape_str(A.shape) + " x " + shape_str(B.shape));

    Tensor C = vec_rhs ? Tensor::zeros({m}) : Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            double aip = A.values[static_cast<size_t>(i) * k + p];
            if (aip == 0.0) continue;
            const double* brow = &B.values[static_cast<size_t>(p) * n];
            double* crow = &C.values[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    Var out = push(std::move(C));
    node(out).backprop = [this, a, b, out, m, k, n]() {
        const std::vector<double>& dC = node(out).grad;
        const Tensor& A = node(a).value;
        const Tensor& B = node(b).value;
        std::vector<double>& dA = grad_buf(a.id);
        std::vector<double>& dB = grad_buf(b.id);
        // dA = dC . B^T
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    acc += dC[static_cast<size_t>(i) * n + j] * B.values[static_cast<size_t>(p) * n + j];
                dA[static_cast<size_t>(i) * k + p] += acc;
            }
        // dB = A^T . dC
        for (int p = 0; p < k; ++p)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < m; ++i)
                    acc += A.values[static_cast<size_t>(i) * k + p] * dC[static_cast<size_t>(i) * n + j];
                dB[static_cast<size_t>(p) * n + j] += acc;
            }
    };
    return out;
}

Var Tape::add(Var a, Var b) {
    check_valid(a, "add");
    check_valid(b, "add");
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (A.shape != B.shape)
        throw DimensionError("add: shapes disagree " + shape_str(A.shape) + " vs " + shape_str(B.shape));
    Tensor C = A;
    for (size_t i = 0; i < C.values.size(); ++i) C.values[i] += B.values[i];
    Var out = push(std::move(C));
    node(out).backprop = [this, a, b, out]() {
        const std::vector<double>& dC = node(out).grad;
        std::vector<double>& dA = grad_buf(a.id);
        std::vector<double>& dB = grad_buf(b.id);
        for (size_t i = 0; i < dC.size(); ++i) {
            dA[i] += dC[i];
            dB[i] += dC[i];
        }
    };
    return out;
}

Var Tape::mul(Var a, Var b) {
    check_valid(a, "mul");
    check_valid(b, "mul");
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (A.shape != B.shape)
        throw DimensionError("mul: shapes disagree " + shape_str(A.shape) + " vs " + shape_str(B.shape));
    Tensor C = A;
    for (size_t i = 0; i < C.values.size(); ++i) C.values[i] *= B.values[i];
    Var out = push(std::move(C));
    node(out).backprop = [this, a, b, out]() {
        const std::vector<double>& dC = node(out).grad;
        const Tensor& A = node(a).value;
        const Tensor& B = node(b).value;
        std::vector<double>& dA = grad_buf(a.id);
        std::vector<double>& dB = grad_buf(b.id);
        for (size_t i = 0; i < dC.size(); ++i) {
            dA[i] += dC[i] * B.values[i];
            dB[i] += dC[i] * A.values[i];
        }
    };
    return out;
}

Var Tape::sigmoid(Var a) {
    check_valid(a, "sigmoid");
    Tensor C = node(a).value;
    for (double& v : C.values) v = 1.0 / (1.0 + std::exp(-v));
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out]() {
        const std::vector<double>& dC = node(out).grad;
        const Tensor& Y = node(out).value;
        std::vector<double>& dA = grad_buf(a.id);
        for (size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] * Y.values[i] * (1.0 - Y.values[i]);
    };
    return out;
}

Var Tape::tanh(Var a) {
    check_valid(a, "tanh");
    Tensor C = node(a).value;
    for (double& v : C.values) v = std::tanh(v);
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out]() {
        const std::vector<double>& dC = node(out).grad;
        const Tensor& Y = node(out).value;
        std::vector<double>& dA = grad_buf(a.id);
        for (size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] * (1.0 - Y.values[i] * Y.values[i]);
    };
    return out;
}

Var Tape::log(Var a) {
    check_valid(a, "log");
    Tensor C = node(a).value;
    for (double& v : C.values) v = std::log(v);
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out]() {
        const std::vector<double>& dC = node(out).grad;
        const Tensor& X = node(a).value;
        std::vector<double>& dA = grad_buf(a.id);
        for (size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] / X.values[i];
    };
    return out;
}

Var Tape::scale(Var a, double c) {
    check_valid(a, "scale");
    Tensor C = node(a).value;
    for (double& v : C.values) v *= c;
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out, c]() {
        const std::vector<double>& dC = node(out).grad;
        std::vector<double>& dA = grad_buf(a.id);
        for (size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] * c;
    };
    return out;
}

Var Tape::concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat: no operands");
    for (Var p : parts) check_valid(p, "concat");
    int nd = node(parts[0]).value.ndim();
    if (nd != 1 && nd != 2) throw DimensionError("concat: only 1-d or 2-d operands");

    if (nd == 1) {
        int total = 0;
        for (Var p : parts) {
            if (node(p).value.ndim() != 1)
                throw DimensionError("concat: mixed ranks");
            total += node(p).value.shape[0];
        }
        Tensor C = Tensor::zeros({total});
        int off = 0;
        for (Var p : parts) {
            const Tensor& P = node(p).value;
            std::copy(P.values.begin(), P.values.end(), C.values.begin() + off);
            off += P.shape[0];
        }
        Var out = push(std::move(C));
        std::vector<Var> ps = parts;
        node(out).backprop = [this, ps, out]() {
            const std::vector<double>& dC = node(out).grad;
            int off = 0;
            for (Var p : ps) {
                std::vector<double>& dP = grad_buf(p.id);
                for (size_t i = 0; i < dP.size(); ++i) dP[i] += dC[static_cast<size_t>(off) + i];
                off += static_cast<int>(dP.size());
            }
        };
        return out;
    }

    int m = node(parts[0]).value.rows();
    int total_cols = 0;
    for (Var p : parts) {
        const Tensor& P = node(p).value;
        if (P.ndim() != 2 || P.rows() != m)
            throw DimensionError("concat: row counts disagree");
        total_cols += P.cols();
    }
    Tensor C = Tensor::zeros({m, total_cols});
    int off = 0;
    for (Var p : parts) {
        const Tensor& P = node(p).value;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < P.cols(); ++j) C.at(i, off + j) = P.at(i, j);
        off += P.cols();
    }
    Var out = push(std::move(C));
    std::vector<Var> ps = parts;
    node(out).backprop = [this, ps, out, m, total_cols]() {
        const std::vector<double>& dC = node(out).grad;
        int off = 0;
        for (Var p : ps) {
            const Tensor& P = node(p).value;
            std::vector<double>& dP = grad_buf(p.id);
            int pc = P.cols();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < pc; ++j)
                    dP[static_cast<size_t>(i) * pc + j] += dC[static_cast<size_t>(i) * total_cols + off + j];
            off += pc;
        }
    };
    return out;
}

Var Tape::softmax(Var a) {
    check_valid(a, "softmax");
    const Tensor& A = node(a).value;
    if (A.ndim() != 1 && A.ndim() != 2)
        throw DimensionError("softmax: only 1-d or 2-d operands, got " + shape_str(A.shape));
    int rows = A.ndim() == 1 ? 1 : A.rows();
    int cols = A.ndim() == 1 ? A.shape[0] : A.cols();
    Tensor C = A;
    for (int i = 0; i < rows; ++i) {
        double* r = &C.values[static_cast<size_t>(i) * cols];
        double mx = r[0];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, r[j]);
        double z = 0.0;
        for (int j = 0; j < cols; ++j) {
            r[j] = std::exp(r[j] - mx);
            z += r[j];
        }
        for (int j = 0; j < cols; ++j) r[j] /= z;
    }
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out, rows, cols]() {
        const std::vector<double>& dC = node(out).grad;
        const Tensor& Y = node(out).value;
        std::vector<double>& dA = grad_buf(a.id);
        for (int i = 0; i < rows; ++i) {
            const double* y = &Y.values[static_cast<size_t>(i) * cols];
            const double* dy = &dC[static_cast<size_t>(i) * cols];
            double dot = 0.0;
            for (int j = 0; j < cols; ++j) dot += dy[j] * y[j];
            for (int j = 0; j < cols; ++j) dA[static_cast<size_t>(i) * cols + j] += y[j] * (dy[j] - dot);
        }
    };
    return out;
}

Var Tape::max_over_rows(Var a) {
    check_valid(a, "max_over_rows");
    const Tensor& A = node(a).value;
    if (A.ndim() != 2) throw DimensionError("max_over_rows: need 2-d, got " + shape_str(A.shape));
    int m = A.rows(), n = A.cols();
    Tensor C = Tensor::zeros({n});
    std::vector<int> argmax(static_cast<size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
        double best = A.at(0, j);
        int bi = 0;
        for (int i = 1; i < m; ++i) {
            if (A.at(i, j) > best) {  // strict: ties keep the lowest index
                best = A.at(i, j);
                bi = i;
            }
        }
        C.values[static_cast<size_t>(j)] = best;
        argmax[static_cast<size_t>(j)] = bi;
    }
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out, n, argmax]() {
        const std::vector<double>& dC = node(out).grad;
        std::vector<double>& dA = grad_buf(a.id);
        for (int j = 0; j < n; ++j)
            dA[static_cast<size_t>(argmax[static_cast<size_t>(j)]) * n + j] += dC[static_cast<size_t>(j)];
    };
    return out;
}

Var Tape::sum(Var a) {
    check_valid(a, "sum");
    const Tensor& A = node(a).value;
    double s = 0.0;
    for (double v : A.values) s += v;
    Var out = push(Tensor::scalar(s));
    node(out).backprop = [this, a, out]() {
        double d = node(out).grad[0];
        std::vector<double>& dA = grad_buf(a.id);
        for (double& g : dA) g += d;
    };
    return out;
}

Var Tape::slice(Var a, int offset, int len) {
    check_valid(a, "slice");
    const Tensor& A = node(a).value;
    if (A.ndim() != 1) throw DimensionError("slice: need 1-d, got " + shape_str(A.shape));
    if (offset < 0 || len <= 0 || offset + len > A.shape[0])
        throw ContractError("slice: range [" + std::to_string(offset) + "," + std::to_string(offset + len) +
                            ") out of " + shape_str(A.shape));
    Tensor C = Tensor::zeros({len});
    std::copy(A.values.begin() + offset, A.values.begin() + offset + len, C.values.begin());
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out, offset, len]() {
        const std::vector<double>& dC = node(out).grad;
        std::vector<double>& dA = grad_buf(a.id);
        for (int i = 0; i < len; ++i) dA[static_cast<size_t>(offset + i)] += dC[static_cast<size_t>(i)];
    };
    return out;
}

Var Tape::pick(Var a, int index) {
    check_valid(a, "pick");
    const Tensor& A = node(a).value;
    if (A.ndim() != 1) throw DimensionError("pick: need 1-d, got " + shape_str(A.shape));
    if (index < 0 || index >= A.shape[0])
        throw ContractError("pick: index " + std::to_string(index) + " out of " + shape_str(A.shape));
    Var out = push(Tensor::scalar(A.values[static_cast<size_t>(index)]));
    node(out).backprop = [this, a, out, index]() {
        grad_buf(a.id)[static_cast<size_t>(index)] += node(out).grad[0];
    };
    return out;
}

Var Tape::row(Var m, int i) {
    check_valid(m, "row");
    const Tensor& A = node(m).value;
    if (A.ndim() != 2) throw DimensionError("row: need 2-d, got " + shape_str(A.shape));
    if (i < 0 || i >= A.rows())
        throw ContractError("row: index " + std::to_string(i) + " out of " + shape_str(A.shape));
    int n = A.cols();
    Tensor C = Tensor::zeros({n});
    std::copy(A.values.begin() + static_cast<size_t>(i) * n, A.values.begin() + static_cast<size_t>(i + 1) * n,
              C.values.begin());
    Var out = push(std::move(C));
    node(out).backprop = [this, m, out, i, n]() {
        const std::vector<double>& dC = node(out).grad;
        std::vector<double>& dA = grad_buf(m.id);
        for (int j = 0; j < n; ++j) dA[static_cast<size_t>(i) * n + j] += dC[static_cast<size_t>(j)];
    };
    return out;
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ContractError("stack_rows: no operands");
    for (Var r : rows) check_valid(r, "stack_rows");
    int n = node(rows[0]).value.shape.at(0);
    for (Var r : rows) {
        const Tensor& R = node(r).value;
        if (R.ndim() != 1 || R.shape[0] != n) throw DimensionError("stack_rows: rows disagree");
    }
    int m = static_cast<int>(rows.size());
    Tensor C = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        const Tensor& R = node(rows[static_cast<size_t>(i)]).value;
        std::copy(R.values.begin(), R.values.end(), C.values.begin() + static_cast<size_t>(i) * n);
    }
    Var out = push(std::move(C));
    std::vector<Var> rs = rows;
    node(out).backprop = [this, rs, out, n]() {
        const std::vector<double>& dC = node(out).grad;
        for (size_t i = 0; i < rs.size(); ++i) {
            std::vector<double>& dR = grad_buf(rs[i].id);
            for (int j = 0; j < n; ++j) dR[static_cast<size_t>(j)] += dC[i * static_cast<size_t>(n) + j];
        }
    };
    return out;
}

Var Tape::reshape(Var a, std::vector<int> shape) {
    check_valid(a, "reshape");
    const Tensor& A = node(a).value;
    int64_t n = 1;
    for (int d : shape) n *= d;
    if (n != A.size())
        throw DimensionError("reshape: size mismatch " + shape_str(A.shape) + " -> " + shape_str(shape));
    Tensor C = A;
    C.shape = std::move(shape);
    Var out = push(std::move(C));
    node(out).backprop = [this, a, out]() {
        const std::vector<double>& dC = node(out).grad;
        std::vector<double>& dA = grad_buf(a.id);
        for (size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i];
    };
    return out;
}

void Tape::backward(Var loss) {
    check_valid(loss, "backward");
    if (backward_done_) throw ContractError("backward: tape already consumed, clear() first");
    if (node(loss).value.size() != 1)
        throw ContractError("backward: loss must be scalar, got " + shape_str(node(loss).value.shape));
    backward_done_ = true;

    grad_buf(loss.id)[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.empty()) continue;  // unreachable from the loss
        if (n.backprop) n.backprop();
        if (n.param && n.param->requires_grad) {
            n.param->ensure_grad();
            for (size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
        }
    }
}

void Tape::clear() {
    nodes_.clear();
    backward_done_ = false;
}

}  // namespace ner
