/*!
  \file model_io.hpp
  \brief Reading and writing the JSON model format

  Weights are stored as decimal strings in shortest round-trip form, so
  `load_model( save_model( spec ) )` reproduces every weight bit for bit.
  The schema is documented in `docs/model_format.md`.
*/

#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "error.hpp"
#include "ir.hpp"

namespace lutcnn
{

inline constexpr int model_format_version = 1;

/*! \brief Shortest decimal string that parses back to exactly `x`. */
inline std::string exact_decimal( double x )
{
  char buf[64];
  auto const res = std::to_chars( buf, buf + sizeof( buf ), x );
  return std::string( buf, res.ptr );
}

namespace detail
{

using json = nlohmann::json;

[[noreturn]] inline void parse_fail( std::string const& path, std::string const& what )
{
  throw error( error_kind::parse, "ir", path + ": " + what );
}

inline json const& field( json const& obj, std::string const& name, std::string const& path )
{
  if ( !obj.is_object() )
    parse_fail( path, "expected an object" );
  auto it = obj.find( name );
  if ( it == obj.end() )
    parse_fail( path + "." + name, "missing field" );
  return *it;
}

inline int int_field( json const& obj, std::string const& name, std::string const& path )
{
  auto const& v = field( obj, name, path );
  if ( !v.is_number_integer() )
    parse_fail( path + "." + name, "expected an integer" );
  return v.get<int>();
}

inline double parse_real( json const& v, std::string const& path )
{
  if ( v.is_number() )
    return v.get<double>();
  if ( !v.is_string() )
    parse_fail( path, "expected a decimal string" );
  auto const& s = v.get_ref<std::string const&>();
  double x = 0.0;
  auto const* first = s.data();
  auto const* last = s.data() + s.size();
  if ( first != last && *first == '+' )
    ++first;
  auto const res = std::from_chars( first, last, x );
  if ( res.ec != std::errc{} || res.ptr != last )
    parse_fail( path, "malformed number '" + s + "'" );
  return x;
}

inline std::vector<double> real_array( json const& obj, std::string const& name, std::string const& path )
{
  auto const& v = field( obj, name, path );
  if ( !v.is_array() )
    parse_fail( path + "." + name, "expected an array" );
  std::vector<double> out;
  out.reserve( v.size() );
  for ( std::size_t i = 0; i < v.size(); ++i )
    out.push_back( parse_real( v[i], path + "." + name + "[" + std::to_string( i ) + "]" ) );
  return out;
}

inline json real_json( std::vector<double> const& v )
{
  auto out = json::array();
  for ( auto x : v )
    out.push_back( exact_decimal( x ) );
  return out;
}

inline batch_norm_params parse_norm( json const& obj, std::string const& path )
{
  return { real_array( obj, "mu", path ), real_array( obj, "sigma_sq", path ), real_array( obj, "gamma", path ),
           real_array( obj, "beta", path ) };
}

inline json norm_json( batch_norm_params const& bn )
{
  return { { "mu", real_json( bn.mu ) },
           { "sigma_sq", real_json( bn.sigma_sq ) },
           { "gamma", real_json( bn.gamma ) },
           { "beta", real_json( bn.beta ) } };
}

inline layer parse_layer( json const& obj, std::string const& path )
{
  auto const& kind_v = field( obj, "kind", path );
  if ( !kind_v.is_string() )
    parse_fail( path + ".kind", "expected a string" );
  auto const kind = kind_v.get<std::string>();
  auto const ppath = path + ".params";

  if ( kind == "input_conv" )
  {
    auto const& p = field( obj, "params", path );
    input_conv_layer l;
    l.params = { int_field( p, "c", ppath ), int_field( p, "k", ppath ), int_field( p, "g", ppath ),
                 int_field( p, "f", ppath ), 1 };
    l.input_bits = int_field( p, "input_bits", ppath );
    l.weights = real_array( obj, "weights", path );
    l.bias = real_array( obj, "bias", path );
    return l;
  }
  if ( kind == "batch_norm" )
    return batch_norm_layer{ parse_norm( obj, path ) };
  if ( kind == "binarize" )
    return binarize_layer{};
  if ( kind == "split_conv" )
  {
    auto const& p = field( obj, "params", path );
    auto const& t = field( p, "tuple", ppath );
    if ( !t.is_array() || t.size() != 7u )
      parse_fail( ppath + ".tuple", "expected 7 integers (c_a, k_a, g_a, f_a, k_b, g_b, f_b)" );
    std::array<int, 7> tuple{};
    for ( std::size_t i = 0; i < 7u; ++i )
    {
      if ( !t[i].is_number_integer() )
        parse_fail( ppath + ".tuple[" + std::to_string( i ) + "]", "expected an integer" );
      tuple[i] = t[i].get<int>();
    }
    split_conv_layer l;
    l.config = split_config::from_tuple( tuple );
    l.alpha_weights = real_array( obj, "alpha_weights", path );
    l.alpha_bias = real_array( obj, "alpha_bias", path );
    l.inner_norm = parse_norm( field( obj, "inner_norm", path ), path + ".inner_norm" );
    l.beta_weights = real_array( obj, "beta_weights", path );
    l.beta_bias = real_array( obj, "beta_bias", path );
    return l;
  }
  if ( kind == "max_pool" )
  {
    auto const& p = field( obj, "params", path );
    max_pool_layer l;
    l.kernel = int_field( p, "kernel", ppath );
    l.stride = int_field( p, "stride", ppath );
    if ( auto it = obj.find( "modes" ); it != obj.end() )
    {
      if ( !it->is_array() )
        parse_fail( path + ".modes", "expected an array" );
      for ( std::size_t i = 0; i < it->size(); ++i )
      {
        auto const& m = ( *it )[i];
        if ( m == "or" )
          l.modes.push_back( pool_mode::or_reduce );
        else if ( m == "and" )
          l.modes.push_back( pool_mode::and_reduce );
        else
          parse_fail( path + ".modes[" + std::to_string( i ) + "]", "expected \"or\" or \"and\"" );
      }
    }
    return l;
  }
  if ( kind == "linear" )
  {
    auto const& p = field( obj, "params", path );
    linear_layer l;
    l.in = int_field( p, "in", ppath );
    l.out = int_field( p, "out", ppath );
    l.weights = real_array( obj, "weights", path );
    l.bias = real_array( obj, "bias", path );
    return l;
  }
  if ( kind == "sigmoid" )
    return sigmoid_layer{};
  parse_fail( path + ".kind", "unknown layer kind '" + kind + "'" );
}

inline json layer_json( layer const& l )
{
  json out;
  out["kind"] = std::string( layer_kind( l ) );
  std::visit(
      [&]( auto const& x ) {
        using T = std::decay_t<decltype( x )>;
        if constexpr ( std::is_same_v<T, input_conv_layer> )
        {
          out["params"] = { { "c", x.params.c },
                            { "k", x.params.k },
                            { "g", x.params.g },
                            { "f", x.params.f },
                            { "input_bits", x.input_bits } };
          out["weights"] = real_json( x.weights );
          out["bias"] = real_json( x.bias );
        }
        else if constexpr ( std::is_same_v<T, batch_norm_layer> )
        {
          out["params"] = { { "channels", x.params.channels() } };
          out.update( norm_json( x.params ) );
        }
        else if constexpr ( std::is_same_v<T, split_conv_layer> )
        {
          out["params"] = { { "tuple", x.config.tuple() } };
          out["alpha_weights"] = real_json( x.alpha_weights );
          out["alpha_bias"] = real_json( x.alpha_bias );
          out["inner_norm"] = norm_json( x.inner_norm );
          out["beta_weights"] = real_json( x.beta_weights );
          out["beta_bias"] = real_json( x.beta_bias );
        }
        else if constexpr ( std::is_same_v<T, max_pool_layer> )
        {
          out["params"] = { { "kernel", x.kernel }, { "stride", x.stride } };
          if ( !x.modes.empty() )
          {
            auto modes = json::array();
            for ( auto m : x.modes )
              modes.push_back( std::string( to_string( m ) ) );
            out["modes"] = modes;
          }
        }
        else if constexpr ( std::is_same_v<T, linear_layer> )
        {
          out["params"] = { { "in", x.in }, { "out", x.out } };
          out["weights"] = real_json( x.weights );
          out["bias"] = real_json( x.bias );
        }
      },
      l );
  return out;
}

inline std::pair<std::size_t, std::size_t> line_column( std::string const& text, std::size_t byte )
{
  std::size_t line = 1, col = 1;
  for ( std::size_t i = 0; i + 1 < byte && i < text.size(); ++i )
  {
    if ( text[i] == '\n' )
    {
      ++line;
      col = 1;
    }
    else
      ++col;
  }
  return { line, col };
}

} // namespace detail

inline nlohmann::json model_to_json( network_spec const& spec )
{
  nlohmann::json out;
  out["format"] = "lutcnn-model";
  out["version"] = model_format_version;
  out["phase"] = std::string( to_string( spec.phase ) );
  out["layers"] = nlohmann::json::array();
  for ( auto const& l : spec.layers )
    out["layers"].push_back( detail::layer_json( l ) );
  return out;
}

inline network_spec model_from_json( nlohmann::json const& doc )
{
  using detail::field;
  using detail::parse_fail;
  auto const& version = field( doc, "version", "$" );
  if ( !version.is_number_integer() || version.get<int>() != model_format_version )
    parse_fail( "$.version", "unsupported model version" );
  network_spec spec;
  auto const& phase = field( doc, "phase", "$" );
  if ( phase == "training" )
    spec.phase = network_phase::training;
  else if ( phase == "deployment" )
    spec.phase = network_phase::deployment;
  else
    parse_fail( "$.phase", "expected \"training\" or \"deployment\"" );
  auto const& layers = field( doc, "layers", "$" );
  if ( !layers.is_array() )
    parse_fail( "$.layers", "expected an array" );
  for ( std::size_t i = 0; i < layers.size(); ++i )
    spec.layers.push_back( detail::parse_layer( layers[i], "$.layers[" + std::to_string( i ) + "]" ) );
  return spec;
}

inline std::string model_to_string( network_spec const& spec ) { return model_to_json( spec ).dump( 2 ) + "\n"; }

inline network_spec model_from_string( std::string const& text )
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    auto const [line, col] = detail::line_column( text, e.byte );
    throw error( error_kind::parse, "ir",
                 "line " + std::to_string( line ) + ", column " + std::to_string( col ) + ": malformed JSON" );
  }
  return model_from_json( doc );
}

inline std::string read_text_file( std::string const& path, std::string const& module )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw error( error_kind::io, module, "cannot open '" + path + "'" );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file( std::string const& path, std::string const& text, std::string const& module )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw error( error_kind::io, module, "cannot write '" + path + "'" );
  out << text;
  if ( !out )
    throw error( error_kind::io, module, "write failed for '" + path + "'" );
}

inline network_spec load_model( std::string const& path ) { return model_from_string( read_text_file( path, "ir" ) ); }

inline void save_model( network_spec const& spec, std::string const& path )
{
  write_text_file( path, model_to_string( spec ), "ir" );
}

} // namespace lutcnn
