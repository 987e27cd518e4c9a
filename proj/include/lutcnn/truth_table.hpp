/*!
  \file truth_table.hpp
  \brief Precomputed block tables and their on-disk artifact formats

  Binary artifact (all integers little-endian):

      "LUTT"  u32 version  u32 phi  u32 m  u8 kind  u32 name_len  name
      2^phi rows, each ceil(m / 8) bytes; output bit o sits in byte o / 8 at bit o % 8

  The hex dump writes the same content as text, one `index: value` line per
  row where `value` is the row's output bits read as an unsigned integer.
*/

#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "bit_vector.hpp"
#include "error.hpp"

namespace lutcnn
{

enum class block_kind : std::uint8_t
{
  input = 0,
  hidden = 1,
  output = 2
};

inline std::string_view to_string( block_kind k )
{
  switch ( k )
  {
  case block_kind::input:
    return "input";
  case block_kind::hidden:
    return "hidden";
  case block_kind::output:
    return "output";
  }
  return "hidden";
}

inline constexpr int default_fan_in_cap = 20;

/*! \brief phi input bits to m output bits, stored as 2^phi rows. */
class truth_table
{
public:
  truth_table() = default;
  truth_table( std::string name, block_kind kind, int phi, int m )
      : name_( std::move( name ) ), kind_( kind ), phi_( phi ), m_( m ),
        bits_( ( std::size_t{ 1 } << phi ) * static_cast<std::size_t>( m ) )
  {
  }

  std::string const& name() const { return name_; }
  block_kind kind() const { return kind_; }
  int phi() const { return phi_; }
  int m() const { return m_; }
  std::size_t rows() const { return std::size_t{ 1 } << phi_; }

  bool get( std::size_t row, int output ) const { return bits_.get( row * static_cast<std::size_t>( m_ ) + static_cast<std::size_t>( output ) ); }
  void set( std::size_t row, int output, bool v ) { bits_.set( row * static_cast<std::size_t>( m_ ) + static_cast<std::size_t>( output ), v ); }

  bit_vector const& bits() const { return bits_; }
  bit_vector& bits() { return bits_; }

  /*! \brief Column of one output: its truth table over the row index. */
  bit_vector column( int output ) const
  {
    bit_vector out( rows() );
    for ( std::size_t r = 0; r < rows(); ++r )
      out.set( r, get( r, output ) );
    return out;
  }

  friend bool operator==( truth_table const&, truth_table const& ) = default;

private:
  std::string name_;
  block_kind kind_ = block_kind::hidden;
  int phi_ = 0;
  int m_ = 0;
  bit_vector bits_;
};

namespace detail
{

inline void put_u32( std::string& out, std::uint32_t v )
{
  for ( int i = 0; i < 4; ++i )
    out.push_back( static_cast<char>( ( v >> ( 8 * i ) ) & 0xffu ) );
}

inline std::uint32_t get_u32( std::string_view in, std::size_t& pos )
{
  if ( pos + 4 > in.size() )
    throw error( error_kind::parse, "transform", "truncated truth table artifact" );
  std::uint32_t v = 0;
  for ( int i = 0; i < 4; ++i )
    v |= static_cast<std::uint32_t>( static_cast<unsigned char>( in[pos + static_cast<std::size_t>( i )] ) ) << ( 8 * i );
  pos += 4;
  return v;
}

} // namespace detail

inline std::string serialize_table( truth_table const& t )
{
  std::string out = "LUTT";
  detail::put_u32( out, 1u );
  detail::put_u32( out, static_cast<std::uint32_t>( t.phi() ) );
  detail::put_u32( out, static_cast<std::uint32_t>( t.m() ) );
  out.push_back( static_cast<char>( t.kind() ) );
  detail::put_u32( out, static_cast<std::uint32_t>( t.name().size() ) );
  out += t.name();
  std::size_t const row_bytes = ( static_cast<std::size_t>( t.m() ) + 7u ) / 8u;
  for ( std::size_t r = 0; r < t.rows(); ++r )
  {
    std::string row( row_bytes, '\0' );
    for ( int o = 0; o < t.m(); ++o )
      if ( t.get( r, o ) )
        row[static_cast<std::size_t>( o / 8 )] = static_cast<char>( static_cast<unsigned char>( row[static_cast<std::size_t>( o / 8 )] ) | ( 1u << ( o % 8 ) ) );
    out += row;
  }
  return out;
}

inline truth_table deserialize_table( std::string_view in )
{
  if ( in.substr( 0, 4 ) != "LUTT" )
    throw error( error_kind::parse, "transform", "not a truth table artifact" );
  std::size_t pos = 4;
  if ( detail::get_u32( in, pos ) != 1u )
    throw error( error_kind::parse, "transform", "unsupported truth table version" );
  auto const phi = detail::get_u32( in, pos );
  auto const m = detail::get_u32( in, pos );
  if ( phi > 30u || m == 0u )
    throw error( error_kind::parse, "transform", "implausible truth table header" );
  if ( pos >= in.size() )
    throw error( error_kind::parse, "transform", "truncated truth table artifact" );
  auto const kind = static_cast<block_kind>( static_cast<unsigned char>( in[pos++] ) );
  auto const name_len = detail::get_u32( in, pos );
  if ( pos + name_len > in.size() )
    throw error( error_kind::parse, "transform", "truncated truth table artifact" );
  truth_table t( std::string( in.substr( pos, name_len ) ), kind, static_cast<int>( phi ), static_cast<int>( m ) );
  pos += name_len;
  std::size_t const row_bytes = ( m + 7u ) / 8u;
  if ( in.size() - pos != row_bytes * t.rows() )
    throw error( error_kind::parse, "transform", "truth table payload size mismatch" );
  for ( std::size_t r = 0; r < t.rows(); ++r )
    for ( int o = 0; o < t.m(); ++o )
      t.set( r, o, ( static_cast<unsigned char>( in[pos + r * row_bytes + static_cast<std::size_t>( o / 8 )] ) >> ( o % 8 ) ) & 1u );
  return t;
}

/*! \brief Text dump for diffing. */
inline std::string hex_dump( truth_table const& t )
{
  std::ostringstream os;
  os << "# lutcnn truth table\n";
  os << "name " << t.name() << "\nkind " << to_string( t.kind() ) << "\nphi " << t.phi() << "\nm " << t.m() << "\n";
  int const digits = ( t.m() + 3 ) / 4;
  int const index_digits = std::max( 1, ( t.phi() + 3 ) / 4 );
  for ( std::size_t r = 0; r < t.rows(); ++r )
  {
    os << std::hex << std::setw( index_digits ) << std::setfill( '0' ) << r << ": ";
    for ( int d = digits - 1; d >= 0; --d )
    {
      unsigned nibble = 0;
      for ( int b = 0; b < 4; ++b )
      {
        int const o = d * 4 + b;
        if ( o < t.m() && t.get( r, o ) )
          nibble |= 1u << b;
      }
      os << "0123456789abcdef"[nibble];
    }
    os << std::dec << "\n";
  }
  return os.str();
}

inline truth_table parse_hex_dump( std::string const& text )
{
  std::istringstream is( text );
  std::string line, key, name, kind_name;
  int phi = -1, m = -1;
  std::getline( is, line );
  if ( line != "# lutcnn truth table" )
    throw error( error_kind::parse, "transform", "not a truth table dump" );
  for ( int i = 0; i < 4; ++i )
  {
    if ( !std::getline( is, line ) )
      throw error( error_kind::parse, "transform", "truncated truth table dump" );
    std::istringstream ls( line );
    ls >> key;
    if ( key == "name" )
      std::getline( ls >> std::ws, name );
    else if ( key == "kind" )
      ls >> kind_name;
    else if ( key == "phi" )
      ls >> phi;
    else if ( key == "m" )
      ls >> m;
  }
  if ( phi < 0 || phi > 30 || m < 1 )
    throw error( error_kind::parse, "transform", "bad truth table dump header" );
  block_kind kind = kind_name == "input" ? block_kind::input : kind_name == "output" ? block_kind::output : block_kind::hidden;
  truth_table t( name, kind, phi, m );
  for ( std::size_t r = 0; r < t.rows(); ++r )
  {
    if ( !std::getline( is, line ) )
      throw error( error_kind::parse, "transform", "truncated truth table dump" );
    auto const colon = line.find( ": " );
    if ( colon == std::string::npos || std::stoull( line.substr( 0, colon ), nullptr, 16 ) != r )
      throw error( error_kind::parse, "transform", "bad row " + std::to_string( r ) );
    auto const value = line.substr( colon + 2 );
    int const digits = static_cast<int>( value.size() );
    for ( int d = 0; d < digits; ++d )
    {
      char const c = value[static_cast<std::size_t>( digits - 1 - d )];
      unsigned const nibble = static_cast<unsigned>( c <= '9' ? c - '0' : c - 'a' + 10 );
      for ( int b = 0; b < 4; ++b )
        if ( d * 4 + b < m )
          t.set( r, d * 4 + b, ( nibble >> b ) & 1u );
    }
  }
  return t;
}

} // namespace lutcnn
