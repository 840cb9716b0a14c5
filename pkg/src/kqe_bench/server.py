from fastmcp import FastMCP

mcp = FastMCP("Kernel Quantile Discrepancies")
