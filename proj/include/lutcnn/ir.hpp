/*!
  \file ir.hpp
  \brief Network intermediate representation for binarized 1D-CNNs

  A network is an ordered list of layers. Activations between precomputable
  blocks are binary (+1/-1, encoded as bits 1/0); weights stay real-valued.
*/

#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"

namespace lutcnn
{

/*! \brief Hyper parameters of a grouped 1D convolution F = (c, k, g, f).
 *
 * Weights of a convolution with these parameters use the layout
 * `[f][c / g][k]`, tap 0 being the oldest sample of the window.
 */
struct conv_params
{
  int c = 1; /*!< input channels */
  int k = 1; /*!< kernel size in time steps */
  int g = 1; /*!< groups */
  int f = 1; /*!< output channels */
  int stride = 1;

  int s_in() const { return c / g; }
  int s_out() const { return f / g; }

  bool valid() const
  {
    return c > 0 && k > 0 && g > 0 && f > 0 && stride > 0 && c % g == 0 && f % g == 0;
  }

  std::size_t weight_count() const
  {
    return static_cast<std::size_t>( f ) * static_cast<std::size_t>( s_in() ) * static_cast<std::size_t>( k );
  }

  friend auto operator<=>( conv_params const&, conv_params const& ) = default;
};

inline std::string to_string( conv_params const& p )
{
  std::ostringstream os;
  os << "(" << p.c << "," << p.k << "," << p.g << "," << p.f << ")";
  return os.str();
}

/*! \brief Violations of the grouped-convolution validity rules. */
inline std::vector<std::string> conv_violations( conv_params const& p )
{
  std::vector<std::string> out;
  if ( p.c <= 0 || p.k <= 0 || p.g <= 0 || p.f <= 0 || p.stride <= 0 )
  {
    out.push_back( "parameters must be positive " + to_string( p ) );
    return out;
  }
  if ( p.c % p.g != 0 )
    out.push_back( "g does not divide c (c=" + std::to_string( p.c ) + ", g=" + std::to_string( p.g ) + ")" );
  if ( p.f % p.g != 0 )
    out.push_back( "g does not divide f (f=" + std::to_string( p.f ) + ", g=" + std::to_string( p.g ) + ")" );
  return out;
}

/*! \brief Tensor shape used for symbolic shape propagation. */
struct tensor_shape
{
  int channels = 0;
  int length = 0;

  friend auto operator<=>( tensor_shape const&, tensor_shape const& ) = default;
};

/*! \brief Output shape of a valid (unpadded) convolution, or length 0 if the input is too short. */
inline tensor_shape propagate_shape( conv_params const& p, tensor_shape in )
{
  if ( in.channels != p.c || in.length < p.k )
    return { p.f, 0 };
  return { p.f, ( in.length - p.k ) / p.stride + 1 };
}

/*! \brief Pair of grouped convolutions (F_alpha, F_beta) replacing a dense convolution.
 *
 * The 7-tuple form is (c_a, k_a, g_a, f_a, k_b, g_b, f_b); c_b is implied by f_a.
 */
struct split_config
{
  conv_params alpha;
  conv_params beta;

  static split_config from_tuple( std::array<int, 7> const& t )
  {
    return { { t[0], t[1], t[2], t[3], 1 }, { t[3], t[4], t[5], t[6], 1 } };
  }

  std::array<int, 7> tuple() const
  {
    return { alpha.c, alpha.k, alpha.g, alpha.f, beta.k, beta.g, beta.f };
  }

  /*! \brief Kernel size k_0 of the replaced convolution (one of the halves is pointwise). */
  int kernel() const { return alpha.k * beta.k; }

  /*! \brief The dense convolution F_0 this block replaces. */
  conv_params replaced() const { return { alpha.c, kernel(), 1, beta.f, 1 }; }

  friend auto operator<=>( split_config const&, split_config const& ) = default;
};

inline std::string to_string( split_config const& cfg )
{
  auto const t = cfg.tuple();
  std::ostringstream os;
  os << "(";
  for ( std::size_t i = 0; i < t.size(); ++i )
    os << ( i ? "," : "" ) << t[i];
  os << ")";
  return os.str();
}

/*! \brief Violations of the split condition for a block. */
inline std::vector<std::string> split_violations( split_config const& cfg )
{
  std::vector<std::string> out;
  for ( auto const& v : conv_violations( cfg.alpha ) )
    out.push_back( "alpha: " + v );
  for ( auto const& v : conv_violations( cfg.beta ) )
    out.push_back( "beta: " + v );
  if ( cfg.beta.c != cfg.alpha.f )
    out.push_back( "split condition violated: c_beta != f_alpha" );
  if ( cfg.alpha.k != 1 && cfg.beta.k != 1 )
    out.push_back( "split condition violated: one of k_alpha, k_beta must be 1" );
  if ( cfg.alpha.stride != 1 || cfg.beta.stride != 1 )
    out.push_back( "split condition violated: split convolutions use stride 1" );
  if ( cfg.beta.g > 0 && cfg.alpha.f > 0 && cfg.alpha.f % cfg.beta.g != 0 )
    out.push_back( "split condition violated: g_beta does not divide f_alpha (f_alpha=" + std::to_string( cfg.alpha.f ) +
                   ", g_beta=" + std::to_string( cfg.beta.g ) + ")" );
  return out;
}

inline bool is_valid( split_config const& cfg ) { return split_violations( cfg ).empty(); }

/*! \brief Per-channel batch normalization parameters.
 *
 * Evaluates `(x - mu) / sigma_sq * gamma - beta`.
 */
struct batch_norm_params
{
  std::vector<double> mu;
  std::vector<double> sigma_sq;
  std::vector<double> gamma;
  std::vector<double> beta;

  std::size_t channels() const { return gamma.size(); }

  double apply( std::size_t channel, double x ) const
  {
    return ( x - mu[channel] ) / sigma_sq[channel] * gamma[channel] - beta[channel];
  }

  static batch_norm_params identity( std::size_t channels )
  {
    return { std::vector<double>( channels, 0.0 ), std::vector<double>( channels, 1.0 ),
             std::vector<double>( channels, 1.0 ), std::vector<double>( channels, 0.0 ) };
  }

  friend bool operator==( batch_norm_params const&, batch_norm_params const& ) = default;
};

enum class pool_mode
{
  or_reduce,
  and_reduce
};

inline std::string_view to_string( pool_mode m ) { return m == pool_mode::or_reduce ? "or" : "and"; }

/*! \brief First layer: convolution over signed integer samples of `input_bits` bits. */
struct input_conv_layer
{
  conv_params params{ 1, 1, 1, 12, 1 };
  int input_bits = 12;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==( input_conv_layer const&, input_conv_layer const& ) = default;
};

struct batch_norm_layer
{
  batch_norm_params params;

  friend bool operator==( batch_norm_layer const&, batch_norm_layer const& ) = default;
};

struct binarize_layer
{
  friend bool operator==( binarize_layer const&, binarize_layer const& ) = default;
};

/*! \brief grouped conv (alpha) -> batchnorm -> binarize -> grouped conv (beta) */
struct split_conv_layer
{
  split_config config;
  std::vector<double> alpha_weights;
  std::vector<double> alpha_bias;
  batch_norm_params inner_norm;
  std::vector<double> beta_weights;
  std::vector<double> beta_bias;

  friend bool operator==( split_conv_layer const&, split_conv_layer const& ) = default;
};

/*! \brief Max pooling. In deployment order it acts on binary values with a per-channel mode. */
struct max_pool_layer
{
  int kernel = 2;
  int stride = 1;
  std::vector<pool_mode> modes;

  friend bool operator==( max_pool_layer const&, max_pool_layer const& ) = default;
};

/*! \brief Pointwise linear layer, weights `[out][in]`. */
struct linear_layer
{
  int in = 1;
  int out = 1;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==( linear_layer const&, linear_layer const& ) = default;
};

struct sigmoid_layer
{
  friend bool operator==( sigmoid_layer const&, sigmoid_layer const& ) = default;
};

using layer = std::variant<input_conv_layer, batch_norm_layer, binarize_layer, split_conv_layer, max_pool_layer,
                           linear_layer, sigmoid_layer>;

inline std::string_view layer_kind( layer const& l )
{
  constexpr std::array<std::string_view, 7> names{ "input_conv", "batch_norm", "binarize", "split_conv",
                                                   "max_pool",   "linear",     "sigmoid" };
  return names[l.index()];
}

enum class network_phase
{
  training,
  deployment
};

inline std::string_view to_string( network_phase p ) { return p == network_phase::training ? "training" : "deployment"; }

struct network_spec
{
  network_phase phase = network_phase::deployment;
  std::vector<layer> layers;

  friend bool operator==( network_spec const&, network_spec const& ) = default;
};

namespace detail
{

inline bool all_finite( std::vector<double> const& v )
{
  for ( auto x : v )
    if ( !std::isfinite( x ) )
      return false;
  return true;
}

inline void check_norm( batch_norm_params const& bn, std::size_t channels, std::string const& where,
                        std::vector<std::string>& out )
{
  if ( bn.mu.size() != channels || bn.sigma_sq.size() != channels || bn.gamma.size() != channels ||
       bn.beta.size() != channels )
  {
    out.push_back( where + ": batchnorm parameter count does not match " + std::to_string( channels ) + " channels" );
    return;
  }
  for ( std::size_t i = 0; i < channels; ++i )
    if ( !( bn.sigma_sq[i] > 0.0 ) )
    {
      out.push_back( where + ": sigma_sq must be positive (channel " + std::to_string( i ) + ")" );
      break;
    }
  if ( !all_finite( bn.mu ) || !all_finite( bn.sigma_sq ) || !all_finite( bn.gamma ) || !all_finite( bn.beta ) )
    out.push_back( where + ": batchnorm parameters must be finite" );
}

inline void check_weights( std::vector<double> const& w, std::size_t expected, std::string const& where,
                           std::string_view name, std::vector<std::string>& out )
{
  if ( w.size() != expected )
    out.push_back( where + ": " + std::string( name ) + " has " + std::to_string( w.size() ) + " values, expected " +
                   std::to_string( expected ) );
  else if ( !all_finite( w ) )
    out.push_back( where + ": " + std::string( name ) + " must be finite" );
}

} // namespace detail

/*! \brief Checks every IR invariant and returns the list of violations.
 *
 * An empty result means the network is well formed: parameters divide,
 * split conditions hold, channel counts chain, convolutions read binary
 * activations, and pooling placement matches the network phase.
 */
inline std::vector<std::string> validate_network( network_spec const& spec )
{
  std::vector<std::string> out;
  int channels = 0;
  bool binary = false;
  bool started = false;
  bool done = false;

  for ( std::size_t i = 0; i < spec.layers.size(); ++i )
  {
    auto const& l = spec.layers[i];
    auto const where = "layers[" + std::to_string( i ) + "] (" + std::string( layer_kind( l ) ) + ")";
    auto const* prev = i > 0 ? &spec.layers[i - 1] : nullptr;

    if ( done )
      out.push_back( where + ": layer after the network output" );
    if ( !started && !std::holds_alternative<input_conv_layer>( l ) )
    {
      out.push_back( where + ": network must start with an input_conv layer" );
      started = true;
    }

    std::visit(
        [&]( auto const& x ) {
          using T = std::decay_t<decltype( x )>;
          if constexpr ( std::is_same_v<T, input_conv_layer> )
          {
            if ( started )
              out.push_back( where + ": input_conv may only appear as the first layer" );
            started = true;
            for ( auto const& v : conv_violations( x.params ) )
              out.push_back( where + ": " + v );
            if ( x.params.c != 1 )
              out.push_back( where + ": input_conv reads a single sample stream (c must be 1)" );
            if ( x.params.stride != 1 )
              out.push_back( where + ": input_conv stride must be 1" );
            if ( x.input_bits < 1 || x.input_bits > 32 )
              out.push_back( where + ": input bit width must be in [1, 32]" );
            if ( x.params.valid() )
            {
              detail::check_weights( x.weights, x.params.weight_count(), where, "weights", out );
              detail::check_weights( x.bias, static_cast<std::size_t>( x.params.f ), where, "bias", out );
            }
            channels = x.params.f;
            binary = false;
          }
          else if constexpr ( std::is_same_v<T, batch_norm_layer> )
          {
            detail::check_norm( x.params, static_cast<std::size_t>( channels ), where, out );
            binary = false;
          }
          else if constexpr ( std::is_same_v<T, binarize_layer> )
          {
            binary = true;
          }
          else if constexpr ( std::is_same_v<T, split_conv_layer> )
          {
            for ( auto const& v : split_violations( x.config ) )
              out.push_back( where + ": " + v );
            if ( x.config.alpha.c != channels )
              out.push_back( where + ": expects " + std::to_string( x.config.alpha.c ) + " input channels, got " +
                             std::to_string( channels ) );
            if ( !binary )
              out.push_back( where + ": input activations are not binary" );
            if ( is_valid( x.config ) )
            {
              detail::check_weights( x.alpha_weights, x.config.alpha.weight_count(), where, "alpha_weights", out );
              detail::check_weights( x.alpha_bias, static_cast<std::size_t>( x.config.alpha.f ), where, "alpha_bias",
                                     out );
              detail::check_norm( x.inner_norm, static_cast<std::size_t>( x.config.alpha.f ), where + " inner_norm",
                                  out );
              detail::check_weights( x.beta_weights, x.config.beta.weight_count(), where, "beta_weights", out );
              detail::check_weights( x.beta_bias, static_cast<std::size_t>( x.config.beta.f ), where, "beta_bias", out );
            }
            channels = x.config.beta.f;
            binary = false;
          }
          else if constexpr ( std::is_same_v<T, max_pool_layer> )
          {
            if ( x.kernel < 1 || x.stride < 1 )
              out.push_back( where + ": kernel and stride must be positive" );
            if ( spec.phase == network_phase::deployment )
            {
              if ( prev == nullptr || !std::holds_alternative<binarize_layer>( *prev ) )
                out.push_back( where + ": in deployment order a max_pool must directly follow a binarize" );
              if ( x.modes.size() != static_cast<std::size_t>( channels ) )
                out.push_back( where + ": deployment pool needs one mode per channel (" + std::to_string( channels ) +
                               ")" );
            }
            else
            {
              if ( prev == nullptr ||
                   !( std::holds_alternative<split_conv_layer>( *prev ) || std::holds_alternative<input_conv_layer>( *prev ) ) )
                out.push_back( where + ": in training order a max_pool must directly follow a convolution" );
              if ( !x.modes.empty() )
                out.push_back( where + ": training-order pools carry no modes" );
            }
          }
          else if constexpr ( std::is_same_v<T, linear_layer> )
          {
            if ( x.in < 1 || x.out < 1 )
              out.push_back( where + ": in and out must be positive" );
            if ( x.in != channels )
              out.push_back( where + ": expects " + std::to_string( x.in ) + " inputs, got " + std::to_string( channels ) );
            if ( !binary )
              out.push_back( where + ": input activations are not binary" );
            if ( x.in > 0 && x.out > 0 )
            {
              detail::check_weights( x.weights, static_cast<std::size_t>( x.in ) * static_cast<std::size_t>( x.out ),
                                     where, "weights", out );
              detail::check_weights( x.bias, static_cast<std::size_t>( x.out ), where, "bias", out );
            }
            channels = x.out;
            binary = false;
          }
          else if constexpr ( std::is_same_v<T, sigmoid_layer> )
          {
            if ( prev == nullptr || !std::holds_alternative<linear_layer>( *prev ) )
              out.push_back( where + ": sigmoid must follow a linear layer" );
            done = true;
          }
        },
        l );
  }
  return out;
}

/*! \brief Throws a structure error listing all violations, if any. */
inline void require_valid( network_spec const& spec, std::string const& module )
{
  auto const report = validate_network( spec );
  if ( report.empty() )
    return;
  std::string msg = "invalid network:";
  for ( auto const& v : report )
    msg += "\n  " + v;
  throw error( error_kind::structure, module, msg );
}

} // namespace lutcnn
