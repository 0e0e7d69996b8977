#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "greenpot/space.hpp"

namespace greenpot {

/// Data-parallel inner loops shared by the energy, solver and diagnostic
/// code. Every kernel exists twice: the OpenMP version here and a plain
/// serial reference in `greenpot::refk` used by the tests and the benchmark.
///
/// Conventions:
///  - Chart energies sum over "cells": vertex x contributes
///    measure(x) * (sum_k v_k^2 + eps)^(p/2) with v_k the forward difference
///    quotient along axis k; axes without a forward lattice neighbor are
///    skipped, so the quadratic case reproduces the finite-difference
///    Dirichlet form exactly.
///  - Edge energies sum conductance * length * (d^2 + eps)^(p/2) per edge,
///    d = value difference / length.
///  - `cell_mask` / `edge_mask` select contributing cells or edges; an empty
///    mask means "all". Masks are indexed by vertex id / edge id.
///  - Parallel reductions accumulate into a fixed number of chunks combined
///    in chunk order, so results do not depend on the thread count.
namespace kernels {

double chart_energy(const MetricGraph& g, std::span<const double> u,
                    std::span<const std::uint8_t> cell_mask, double p, double eps);

/// dense gradient of chart_energy w.r.t. every vertex value
void chart_energy_gradient(const MetricGraph& g, std::span<const double> u,
                           std::span<const std::uint8_t> cell_mask, double p,
                           double eps, std::span<double> grad_out);

/// sum_x measure(x) |Du|^(p-2) (Du . Dphi) over masked cells
double chart_pairing(const MetricGraph& g, std::span<const double> u,
                     std::span<const double> phi,
                     std::span<const std::uint8_t> cell_mask, double p);

double edge_energy(const MetricGraph& g, std::span<const double> u,
                   std::span<const std::uint8_t> edge_mask, double p, double eps);

void edge_energy_gradient(const MetricGraph& g, std::span<const double> u,
                          std::span<const std::uint8_t> edge_mask, double p,
                          double eps, std::span<double> grad_out);

/// sum_{v in set} |u(v)|^p measure(v)
double weighted_power_sum(const MetricGraph& g, std::span<const double> u,
                          const VertexSet& set, double p);

} // namespace kernels

/// Serial reference implementations (identical contracts).
namespace refk {

double chart_energy(const MetricGraph& g, std::span<const double> u,
                    std::span<const std::uint8_t> cell_mask, double p, double eps);

void chart_energy_gradient(const MetricGraph& g, std::span<const double> u,
                           std::span<const std::uint8_t> cell_mask, double p,
                           double eps, std::span<double> grad_out);

double chart_pairing(const MetricGraph& g, std::span<const double> u,
                     std::span<const double> phi,
                     std::span<const std::uint8_t> cell_mask, double p);

double edge_energy(const MetricGraph& g, std::span<const double> u,
                   std::span<const std::uint8_t> edge_mask, double p, double eps);

void edge_energy_gradient(const MetricGraph& g, std::span<const double> u,
                          std::span<const std::uint8_t> edge_mask, double p,
                          double eps, std::span<double> grad_out);

double weighted_power_sum(const MetricGraph& g, std::span<const double> u,
                          const VertexSet& set, double p);

} // namespace refk

} // namespace greenpot
