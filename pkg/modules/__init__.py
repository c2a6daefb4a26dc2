# Modules package for the pure-state tomography toolkit
