/*!
  \file emit_vhdl.hpp
  \brief Portable VHDL-93 generation for a LUT netlist

  One entity per stage (`<stage-id>.vhd`), a streaming top level
  (`top.vhd`) and a testbench skeleton (`tb_top.vhd`). Only
  ieee.std_logic_1164 and ieee.numeric_std are used.

  Each block output is a constant truth table indexed by its group window:
  `constant T_O<o> : std_logic_vector(0 to 2**phi - 1)`, where character i
  of the concatenated string literal is table row i.
*/

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "model_io.hpp"
#include "netlist.hpp"

namespace lutcnn
{

struct emitted_file
{
  std::string name;
  std::string content;

  friend bool operator==( emitted_file const&, emitted_file const& ) = default;
};

struct emit_bundle
{
  std::vector<emitted_file> files;

  emitted_file const* find( std::string const& name ) const
  {
    for ( auto const& f : files )
      if ( f.name == name )
        return &f;
    return nullptr;
  }

  friend bool operator==( emit_bundle const&, emit_bundle const& ) = default;
};

struct emit_options
{
  int testbench_window = 0; /*!< samples streamed by the testbench; 0 uses the receptive field */
};

/*! \brief Receptive field computed from stage kernels and strides. */
inline int receptive_field( lut_netlist const& n )
{
  int r = 1;
  for ( auto it = n.stages.rbegin(); it != n.stages.rend(); ++it )
    r = ( r - 1 ) * it->stride + it->kernel;
  return r;
}

namespace detail
{

inline bool is_vhdl_identifier( std::string const& s )
{
  if ( s.empty() || !std::isalpha( static_cast<unsigned char>( s.front() ) ) || s.back() == '_' )
    return false;
  for ( std::size_t i = 0; i < s.size(); ++i )
  {
    auto const c = static_cast<unsigned char>( s[i] );
    if ( !( std::isalnum( c ) || c == '_' ) || ( c == '_' && i + 1 < s.size() && s[i + 1] == '_' ) )
      return false;
  }
  return true;
}

inline std::string entity_name( netlist_stage const& s ) { return "lutcnn_" + s.id; }

inline char const* vhdl_header = "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n\n";

inline void stage_entity_head( std::ostringstream& os, netlist_stage const& s )
{
  auto const name = entity_name( s );
  os << "-- stage " << s.id << ": kernel " << s.kernel << ", stride " << s.stride << ", " << s.inputs.size() << " in, "
     << s.registers.size() << " out\n";
  os << vhdl_header;
  os << "entity " << name << " is\n"
     << "  port (\n"
     << "    clk       : in  std_logic;\n"
     << "    rst       : in  std_logic;\n"
     << "    in_valid  : in  std_logic;\n"
     << "    in_last   : in  std_logic;\n"
     << "    din       : in  std_logic_vector(" << s.inputs.size() - 1 << " downto 0);\n"
     << "    out_valid : out std_logic;\n"
     << "    out_last  : out std_logic;\n"
     << "    dout      : out std_logic_vector(" << s.registers.size() - 1 << " downto 0)\n"
     << "  );\n"
     << "end entity " << name << ";\n\n";
}

/*! \brief Window signals, delay lines and the registered, strided output process. */
inline void stage_window_decls( std::ostringstream& os, netlist_stage const& s )
{
  auto const w = s.inputs.size();
  auto const k = static_cast<std::size_t>( s.kernel );
  if ( k > 1 )
  {
    os << "  type hist_t is array (1 to " << k - 1 << ") of std_logic_vector(" << w - 1 << " downto 0);\n";
    os << "  signal hist  : hist_t := (others => (others => '0'));\n";
  }
  os << "  signal win   : std_logic_vector(" << k * w - 1 << " downto 0);\n";
  os << "  signal y     : std_logic_vector(" << s.registers.size() - 1 << " downto 0);\n";
  os << "  signal fill  : integer range 0 to " << k - 1 << " := 0;\n";
  os << "  signal phase : integer range 0 to " << s.stride - 1 << " := 0;\n";
}

inline void stage_window_body( std::ostringstream& os, netlist_stage const& s )
{
  auto const w = s.inputs.size();
  auto const k = static_cast<std::size_t>( s.kernel );
  os << "  -- tap 0 is the oldest sample\n";
  for ( std::size_t t = 0; t < k; ++t )
  {
    os << "  win(" << ( t + 1 ) * w - 1 << " downto " << t * w << ") <= ";
    if ( t + 1 == k )
      os << "din;\n";
    else
      os << "hist(" << k - 1 - t << ");\n";
  }
}

inline void stage_process( std::ostringstream& os, netlist_stage const& s )
{
  auto const k = s.kernel;
  os << "  process (clk)\n"
     << "  begin\n"
     << "    if rising_edge(clk) then\n"
     << "      if rst = '1' then\n"
     << "        fill <= 0;\n"
     << "        phase <= 0;\n"
     << "        out_valid <= '0';\n"
     << "        out_last <= '0';\n"
     << "      else\n"
     << "        out_valid <= '0';\n"
     << "        out_last <= in_last;\n"
     << "        if in_valid = '1' then\n";
  if ( k > 1 )
  {
    os << "          hist(1) <= din;\n";
    if ( k > 2 )
      os << "          for d in 2 to " << k - 1 << " loop\n"
         << "            hist(d) <= hist(d - 1);\n"
         << "          end loop;\n";
  }
  os << "          if fill = " << k - 1 << " then\n"
     << "            if phase = 0 then\n"
     << "              dout <= y;\n"
     << "              out_valid <= '1';\n"
     << "            end if;\n"
     << "            if phase = " << s.stride - 1 << " then\n"
     << "              phase <= 0;\n"
     << "            else\n"
     << "              phase <= phase + 1;\n"
     << "            end if;\n"
     << "          else\n"
     << "            fill <= fill + 1;\n"
     << "          end if;\n"
     << "        end if;\n"
     << "        if in_last = '1' then\n"
     << "          fill <= 0;\n"
     << "          phase <= 0;\n"
     << "        end if;\n"
     << "      end if;\n"
     << "    end if;\n"
     << "  end process;\n";
}

inline void table_constant( std::ostringstream& os, truth_table const& t, int o )
{
  std::size_t const rows = t.rows();
  os << "  constant T_O" << o << " : std_logic_vector(0 to " << rows - 1 << ") :=\n";
  for ( std::size_t first = 0; first < rows; first += 64u )
  {
    os << "    \"";
    for ( std::size_t r = first; r < std::min( rows, first + 64u ); ++r )
      os << ( t.get( r, o ) ? '1' : '0' );
    os << "\"" << ( first + 64u < rows ? " &\n" : ";\n" );
  }
}

inline std::string block_entity( netlist_stage const& s )
{
  if ( !s.block || !s.table )
    throw error( error_kind::structure, "emit", "block stage " + s.id + " carries no truth table" );
  auto const& b = *s.block;
  auto const& t = *s.table;
  if ( t.m() != static_cast<int>( s.registers.size() ) || b.input_width() != static_cast<int>( s.inputs.size() ) )
    throw error( error_kind::structure, "emit", "block stage " + s.id + " does not match its table" );
  std::ostringstream os;
  stage_entity_head( os, s );
  os << "architecture rtl of " << entity_name( s ) << " is\n";
  for ( int o = 0; o < t.m(); ++o )
    table_constant( os, t, o );
  stage_window_decls( os, s );
  for ( int o = 0; o < t.m(); ++o )
    os << "  signal idx" << o << " : unsigned(" << t.phi() - 1 << " downto 0);\n";
  os << "begin\n";
  stage_window_body( os, s );
  int const c = b.params.c;
  for ( int o = 0; o < t.m(); ++o )
  {
    for ( int i = 0; i < t.phi(); ++i )
    {
      auto const src = b.source_of( o, i );
      os << "  idx" << o << "(" << i << ") <= win(" << ( src.tap * c + src.channel ) * b.input_bits + src.bit << ");\n";
    }
    os << "  y(" << o << ") <= T_O" << o << "(to_integer(idx" << o << "));\n";
  }
  stage_process( os, s );
  os << "end architecture rtl;\n";
  return os.str();
}

inline std::string pool_entity( netlist_stage const& s )
{
  std::ostringstream os;
  stage_entity_head( os, s );
  os << "architecture rtl of " << entity_name( s ) << " is\n";
  stage_window_decls( os, s );
  os << "begin\n";
  stage_window_body( os, s );
  auto const w = s.inputs.size();
  for ( std::size_t ch = 0; ch < s.pools.size(); ++ch )
  {
    char const* op = s.pools[ch].mode == pool_mode::and_reduce ? " and " : " or ";
    os << "  y(" << ch << ") <= ";
    for ( std::size_t t = 0; t < static_cast<std::size_t>( s.kernel ); ++t )
      os << ( t ? op : "" ) << "win(" << t * w + ch << ")";
    os << ";\n";
  }
  stage_process( os, s );
  os << "end architecture rtl;\n";
  return os.str();
}

inline std::string top_entity( lut_netlist const& n )
{
  std::ostringstream os;
  os << "-- streaming top level: one sample per clock, decision held with done\n";
  os << vhdl_header;
  os << "entity lutcnn_top is\n"
     << "  port (\n"
     << "    clk          : in  std_logic;\n"
     << "    rst          : in  std_logic;\n"
     << "    sample_in    : in  std_logic_vector(" << n.input_bits - 1 << " downto 0);\n"
     << "    sample_valid : in  std_logic;\n"
     << "    sample_last  : in  std_logic;\n"
     << "    ready        : out std_logic;\n"
     << "    decision     : out std_logic;\n"
     << "    done         : out std_logic\n"
     << "  );\n"
     << "end entity lutcnn_top;\n\n";
  os << "architecture rtl of lutcnn_top is\n";
  os << "  signal s_data  : std_logic_vector(" << n.input_bits - 1 << " downto 0) := (others => '0');\n";
  os << "  signal s_valid : std_logic := '0';\n";
  os << "  signal s_last  : std_logic := '0';\n";
  for ( std::size_t i = 0; i < n.stages.size(); ++i )
  {
    auto const& s = n.stages[i];
    os << "  signal d" << i << " : std_logic_vector(" << s.registers.size() - 1 << " downto 0);\n";
    os << "  signal v" << i << " : std_logic;\n";
    os << "  signal l" << i << " : std_logic;\n";
  }
  os << "begin\n";
  os << "  ready <= '1';\n\n";
  os << "  process (clk)\n"
     << "  begin\n"
     << "    if rising_edge(clk) then\n"
     << "      if rst = '1' then\n"
     << "        s_valid <= '0';\n"
     << "        s_last <= '0';\n"
     << "      else\n"
     << "        s_data <= sample_in;\n"
     << "        s_valid <= sample_valid;\n"
     << "        s_last <= sample_valid and sample_last;\n"
     << "      end if;\n"
     << "    end if;\n"
     << "  end process;\n";
  for ( std::size_t i = 0; i < n.stages.size(); ++i )
  {
    auto const& s = n.stages[i];
    std::string const din = i == 0 ? "s_data" : "d" + std::to_string( i - 1 );
    std::string const vin = i == 0 ? "s_valid" : "v" + std::to_string( i - 1 );
    std::string const lin = i == 0 ? "s_last" : "l" + std::to_string( i - 1 );
    os << "\n  u_" << s.id << " : entity work." << entity_name( s ) << "\n"
       << "    port map (\n"
       << "      clk       => clk,\n"
       << "      rst       => rst,\n"
       << "      in_valid  => " << vin << ",\n"
       << "      in_last   => " << lin << ",\n"
       << "      din       => " << din << ",\n"
       << "      out_valid => v" << i << ",\n"
       << "      out_last  => l" << i << ",\n"
       << "      dout      => d" << i << "\n"
       << "    );\n";
  }
  auto const last = n.stages.size() - 1;
  os << "\n  decision <= d" << last << "(0);\n";
  os << "  done <= l" << last << ";\n";
  os << "end architecture rtl;\n";
  return os.str();
}

inline std::string testbench( lut_netlist const& n, int window )
{
  std::ostringstream os;
  os << "-- testbench skeleton: streams " << window << " zero samples and reports the decision\n";
  os << vhdl_header;
  os << "entity tb_top is\n"
     << "end entity tb_top;\n\n"
     << "architecture sim of tb_top is\n"
     << "  constant WINDOW : integer := " << window << ";\n"
     << "  signal clk          : std_logic := '0';\n"
     << "  signal rst          : std_logic := '1';\n"
     << "  signal sample_in    : std_logic_vector(" << n.input_bits - 1 << " downto 0) := (others => '0');\n"
     << "  signal sample_valid : std_logic := '0';\n"
     << "  signal sample_last  : std_logic := '0';\n"
     << "  signal ready        : std_logic;\n"
     << "  signal decision     : std_logic;\n"
     << "  signal done         : std_logic;\n"
     << "  signal finished     : boolean := false;\n"
     << "begin\n"
     << "  clk <= not clk after 5 ns when not finished else clk;\n\n"
     << "  dut : entity work.lutcnn_top\n"
     << "    port map (clk, rst, sample_in, sample_valid, sample_last, ready, decision, done);\n\n"
     << "  stimulus : process\n"
     << "  begin\n"
     << "    wait until rising_edge(clk);\n"
     << "    rst <= '0';\n"
     << "    for i in 0 to WINDOW - 1 loop\n"
     << "      sample_in <= (others => '0');\n"
     << "      sample_valid <= '1';\n"
     << "      if i = WINDOW - 1 then\n"
     << "        sample_last <= '1';\n"
     << "      else\n"
     << "        sample_last <= '0';\n"
     << "      end if;\n"
     << "      wait until rising_edge(clk);\n"
     << "    end loop;\n"
     << "    sample_valid <= '0';\n"
     << "    sample_last <= '0';\n"
     << "    wait until rising_edge(clk) and done = '1';\n"
     << "    report \"decision = \" & std_logic'image(decision);\n"
     << "    finished <= true;\n"
     << "    wait;\n"
     << "  end process;\n"
     << "end architecture sim;\n";
  return os.str();
}

} // namespace detail

/*! \brief Generates the VHDL file set in memory; output is byte-deterministic. */
inline emit_bundle emit_vhdl( lut_netlist const& n, emit_options const& opts = {} )
{
  if ( n.stages.empty() )
    throw error( error_kind::structure, "emit", "netlist has no stages" );
  if ( n.input_bits < 1 || n.input_port.size() != static_cast<std::size_t>( n.input_bits ) )
    throw error( error_kind::structure, "emit", "netlist input port does not match its bit width" );
  emit_bundle bundle;
  for ( auto const& s : n.stages )
  {
    if ( !detail::is_vhdl_identifier( s.id ) || s.id == "top" )
      throw error( error_kind::structure, "emit", "stage id '" + s.id + "' is not a usable VHDL name" );
    if ( s.inputs.empty() || s.registers.empty() )
      throw error( error_kind::structure, "emit", "stage " + s.id + " has unnamed or empty ports" );
    if ( bundle.find( s.id + ".vhd" ) )
      throw error( error_kind::structure, "emit", "duplicate stage id " + s.id );
    bundle.files.push_back( { s.id + ".vhd", s.type == stage_type::block ? detail::block_entity( s ) : detail::pool_entity( s ) } );
  }
  bundle.files.push_back( { "top.vhd", detail::top_entity( n ) } );
  bundle.files.push_back( { "tb_top.vhd", detail::testbench( n, opts.testbench_window > 0 ? opts.testbench_window : receptive_field( n ) ) } );
  return bundle;
}

/*! \brief Writes every file of a bundle into `dir`, creating it if needed. */
inline void write_bundle( emit_bundle const& bundle, std::filesystem::path const& dir )
{
  std::error_code ec;
  std::filesystem::create_directories( dir, ec );
  if ( ec )
    throw error( error_kind::io, "emit", "cannot create " + dir.string() + ": " + ec.message() );
  for ( auto const& f : bundle.files )
    write_text_file( ( dir / f.name ).string(), f.content, "emit" );
}

} // namespace lutcnn
