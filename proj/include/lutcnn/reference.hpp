/*!
  \file reference.hpp
  \brief Double-precision forward pass over the network IR

  This is the floating-point oracle the compiled netlist is checked
  against. It works on whole tensors and shares no code with truth-table
  precomputation; both follow the same accumulation order (bias added after
  the sum over channels, then taps) so their results agree bit for bit.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "ir.hpp"

namespace lutcnn
{

/*! \brief `bin(x) = +1 if x >= 0 else -1`; note bin(0) = +1. */
inline double binarize_value( double x ) { return x >= 0.0 ? 1.0 : -1.0; }

/*! \brief Binary activations over time, `[time][channel]`, 1 encodes +1 and 0 encodes -1. */
using bit_matrix = std::vector<std::vector<std::uint8_t>>;

enum class trace_kind
{
  block,  /*!< output of a binarize layer */
  alpha,  /*!< inner binarization of a split block */
  pool,   /*!< binary pooling (deployment order) */
  output  /*!< thresholded output layer */
};

struct trace_entry
{
  std::string id;
  trace_kind kind = trace_kind::block;
  bit_matrix bits;
};

/*! \brief Values entering one batchnorm, `[channel][time]`. */
struct norm_probe
{
  std::size_t layer_index = 0;
  bool inner = false; /*!< inner normalization of a split block */
  std::vector<std::vector<double>> values;
};

struct forward_options
{
  bool record_norm_inputs = false;
};

struct forward_result
{
  std::vector<double> logits; /*!< pre-sigmoid value of output 0 per time step */
  double probability = 0.5;
  bool decision = false;
  bool has_output = false;
  std::vector<trace_entry> trace;
  std::vector<norm_probe> norm_inputs; /*!< filled when requested, in network order */
};

/*! \brief Signed range of `bits`-bit two's complement samples. */
inline std::pair<std::int64_t, std::int64_t> sample_range( int bits )
{
  return { -( std::int64_t{ 1 } << ( bits - 1 ) ), ( std::int64_t{ 1 } << ( bits - 1 ) ) - 1 };
}

namespace detail
{

using tensor = std::vector<std::vector<double>>; // [channel][time]

inline tensor conv_forward( conv_params const& p, std::vector<double> const& w, std::vector<double> const& bias,
                            tensor const& x )
{
  int const len = static_cast<int>( x.empty() ? 0 : x[0].size() );
  if ( len < p.k )
    throw error( error_kind::structure, "netlist", "input window too short for kernel " + std::to_string( p.k ) );
  int const out_len = ( len - p.k ) / p.stride + 1;
  int const s_in = p.s_in();
  int const s_out = p.s_out();
  tensor y( static_cast<std::size_t>( p.f ), std::vector<double>( static_cast<std::size_t>( out_len ) ) );
  for ( int o = 0; o < p.f; ++o )
  {
    int const group = o / s_out;
    for ( int tau = 0; tau < out_len; ++tau )
    {
      double acc = 0.0;
      for ( int j = 0; j < s_in; ++j )
      {
        auto const& xs = x[static_cast<std::size_t>( group * s_in + j )];
        for ( int t = 0; t < p.k; ++t )
          acc += w[static_cast<std::size_t>( ( o * s_in + j ) * p.k + t )] * xs[static_cast<std::size_t>( tau * p.stride + t )];
      }
      y[static_cast<std::size_t>( o )][static_cast<std::size_t>( tau )] = acc + bias[static_cast<std::size_t>( o )];
    }
  }
  return y;
}

inline void norm_forward( batch_norm_params const& bn, tensor& x )
{
  for ( std::size_t c = 0; c < x.size(); ++c )
    for ( auto& v : x[c] )
      v = bn.apply( c, v );
}

inline void binarize_forward( tensor& x )
{
  for ( auto& ch : x )
    for ( auto& v : ch )
      v = binarize_value( v );
}

inline tensor pool_forward( max_pool_layer const& p, tensor const& x, bool deployment )
{
  int const len = static_cast<int>( x.empty() ? 0 : x[0].size() );
  if ( len < p.kernel )
    throw error( error_kind::structure, "netlist", "input window too short for pool kernel " + std::to_string( p.kernel ) );
  int const out_len = ( len - p.kernel ) / p.stride + 1;
  tensor y( x.size(), std::vector<double>( static_cast<std::size_t>( out_len ) ) );
  for ( std::size_t c = 0; c < x.size(); ++c )
  {
    bool const use_min = deployment && p.modes[c] == pool_mode::and_reduce;
    for ( int tau = 0; tau < out_len; ++tau )
    {
      auto const first = x[c].begin() + tau * p.stride;
      y[c][static_cast<std::size_t>( tau )] = use_min ? *std::min_element( first, first + p.kernel )
                                                      : *std::max_element( first, first + p.kernel );
    }
  }
  return y;
}

inline bit_matrix to_bits( tensor const& x )
{
  std::size_t const len = x.empty() ? 0u : x[0].size();
  bit_matrix out( len, std::vector<std::uint8_t>( x.size() ) );
  for ( std::size_t c = 0; c < x.size(); ++c )
    for ( std::size_t t = 0; t < len; ++t )
      out[t][c] = x[c][t] > 0.0 ? 1u : 0u;
  return out;
}

} // namespace detail

/*! \brief Runs a window of integer samples through the network in either phase.
 *
 * The decision is taken at the last output time step: 1 iff the pre-sigmoid
 * value is >= 0, which is the same as sigmoid >= 0.5 without rounding at
 * the boundary. Every binary activation is recorded in `trace`, named after
 * the stage that produces it.
 */
inline forward_result reference_forward( network_spec const& spec, std::span<std::int64_t const> samples,
                                         forward_options const& opts = {} )
{
  forward_result result;
  detail::tensor x;
  bool const deployment = spec.phase == network_phase::deployment;
  std::string producer;
  int split_index = 0;
  int pool_index = 0;

  for ( std::size_t li = 0; li < spec.layers.size(); ++li )
  {
    auto const& l = spec.layers[li];
    std::visit(
        [&]( auto const& layer ) {
          using T = std::decay_t<decltype( layer )>;
          if constexpr ( std::is_same_v<T, input_conv_layer> )
          {
            auto const [lo, hi] = sample_range( layer.input_bits );
            detail::tensor in( 1, std::vector<double>( samples.size() ) );
            for ( std::size_t t = 0; t < samples.size(); ++t )
            {
              if ( samples[t] < lo || samples[t] > hi )
                throw error( error_kind::input, "netlist",
                             "sample " + std::to_string( samples[t] ) + " does not fit " + std::to_string( layer.input_bits ) + " bits" );
              in[0][t] = static_cast<double>( samples[t] );
            }
            x = detail::conv_forward( layer.params, layer.weights, layer.bias, in );
            producer = "input";
          }
          else if constexpr ( std::is_same_v<T, batch_norm_layer> )
          {
            if ( opts.record_norm_inputs )
              result.norm_inputs.push_back( { li, false, x } );
            detail::norm_forward( layer.params, x );
          }
          else if constexpr ( std::is_same_v<T, binarize_layer> )
          {
            detail::binarize_forward( x );
            result.trace.push_back( { producer, trace_kind::block, detail::to_bits( x ) } );
          }
          else if constexpr ( std::is_same_v<T, split_conv_layer> )
          {
            ++split_index;
            auto const name = "split" + std::to_string( split_index );
            auto a = detail::conv_forward( layer.config.alpha, layer.alpha_weights, layer.alpha_bias, x );
            if ( opts.record_norm_inputs )
              result.norm_inputs.push_back( { li, true, a } );
            detail::norm_forward( layer.inner_norm, a );
            detail::binarize_forward( a );
            result.trace.push_back( { name + "_alpha", trace_kind::alpha, detail::to_bits( a ) } );
            x = detail::conv_forward( layer.config.beta, layer.beta_weights, layer.beta_bias, a );
            producer = name + "_beta";
          }
          else if constexpr ( std::is_same_v<T, max_pool_layer> )
          {
            ++pool_index;
            x = detail::pool_forward( layer, x, deployment );
            if ( deployment )
              result.trace.push_back( { "pool" + std::to_string( pool_index ), trace_kind::pool, detail::to_bits( x ) } );
          }
          else if constexpr ( std::is_same_v<T, linear_layer> )
          {
            conv_params const p{ layer.in, 1, 1, layer.out, 1 };
            x = detail::conv_forward( p, layer.weights, layer.bias, x );
            result.logits = x[0];
            result.has_output = true;
            detail::tensor thresholded = x;
            detail::binarize_forward( thresholded );
            result.trace.push_back( { "output", trace_kind::output, detail::to_bits( thresholded ) } );
          }
          else if constexpr ( std::is_same_v<T, sigmoid_layer> )
          {
            for ( auto& ch : x )
              for ( auto& v : ch )
                v = 1.0 / ( 1.0 + std::exp( -v ) );
          }
        },
        l );
  }

  if ( result.has_output )
  {
    if ( result.logits.empty() )
      throw error( error_kind::structure, "netlist", "window produces no output time step" );
    double const z = result.logits.back();
    result.decision = z >= 0.0;
    result.probability = 1.0 / ( 1.0 + std::exp( -z ) );
  }
  return result;
}

/*! \brief Activations that cross a block boundary, in order.
 *
 * Drops binarize outputs that are immediately pooled, so the training-order
 * and deployment-order traces of one network line up entry by entry.
 */
inline std::vector<bit_matrix> boundary_activations( forward_result const& r )
{
  std::vector<bit_matrix> out;
  for ( std::size_t i = 0; i < r.trace.size(); ++i )
  {
    bool const pooled_next = i + 1 < r.trace.size() && r.trace[i + 1].kind == trace_kind::pool;
    if ( r.trace[i].kind == trace_kind::block && pooled_next )
      continue;
    out.push_back( r.trace[i].bits );
  }
  return out;
}

} // namespace lutcnn
